"""Benchmark the compiled kernels against the pure-numpy fallback.

Runs a fixed seeded workload in this process, then re-runs it in a child
process with the other backend selected via PGG_NO_NUMBA, and prints both
timings side by side together with a cross-backend fingerprint check.

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

from pggsolve import baselines as B
from pggsolve.backend import backend_name
from pggsolve._kernels import fingerprint_workload
from pggsolve.gil import greedy_rollout, init_params
from pggsolve.graphgen import FamilyConfig, make_instance
from pggsolve.uct import UctConfig, plan_episode

CHILD_ENV = "PGG_BENCH_CHILD"


def _best_of(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best * 1000.0


def run_workload(repeats: int) -> dict:
    i15 = make_instance(FamilyConfig("BA", 15, "HC"), "test", 0, 7)
    i25 = make_instance(FamilyConfig("ER", 25, "HC"), "test", 0, 7)
    i100 = make_instance(FamilyConfig("BA", 100, "HC"), "test", 0, 7)
    params = init_params(0, K=3)

    cases = {
        "uct_episode_n15": lambda: plan_episode(i15, "sw", UctConfig(0.5), 3),
        "uct_episode_n25": lambda: plan_episode(i25, "sw", UctConfig(0.5), 3),
        "sa_search_n25": lambda: B.simulated_annealing(i25, "sw", 3),
        "br_dynamics_n100": lambda: B.best_response(i100, "sw", 3),
        "random_set_n100": lambda: B.random_equilibrium(i100, "sw", 3),
        "policy_rollout_n100": lambda: greedy_rollout(i100, params, "sw"),
    }
    out = {}
    for name, fn in cases.items():
        fn()  # warmup; compilation must not land in the timing
        out[name] = _best_of(fn, repeats)
    return out


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    times = run_workload(args.repeats)
    if os.environ.get(CHILD_ENV):
        print(json.dumps({"backend": backend_name(), "times": times,
                          "fingerprint": fingerprint_workload()}))
        return 0

    env = dict(os.environ)
    env[CHILD_ENV] = "1"
    if backend_name() == "numba":
        env["PGG_NO_NUMBA"] = "1"
    else:
        env.pop("PGG_NO_NUMBA", None)
    child = subprocess.run(
        [sys.executable, os.path.abspath(__file__),
         "--repeats", str(args.repeats)],
        env=env, capture_output=True, text=True, check=True)
    other = json.loads(child.stdout.splitlines()[-1])

    here, there = backend_name(), other["backend"]
    fp_match = fingerprint_workload() == other["fingerprint"]
    print(f"backends: {here} (this process) vs {there} (child)")
    print(f"fingerprints identical: {fp_match}")
    w = max(len(k) for k in times)
    print(f"{'case'.ljust(w)}  {here:>10}  {there:>10}  {'ratio':>7}")
    for name in times:
        a, b = times[name], other["times"][name]
        print(f"{name.ljust(w)}  {a:8.2f}ms  {b:8.2f}ms  {b / a:6.1f}x")
    return 0 if fp_match else 1


if __name__ == "__main__":
    sys.exit(main())
