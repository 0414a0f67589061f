"""Baseline equilibrium-selection methods.

Every method returns a SolveResult whose profile is a pure equilibrium of the
game (exhaustive search, best response, annealing, random completion, the two
greedy heuristics), except payoff transfer, whose endpoint is an equilibrium
of the transfer-augmented game and need not induce an independent set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import (
    br_dynamics,
    profile_utilities,
    random_complete,
    rng_uniform,
    sa_search,
    static_score_rollout,
)
from .game import (
    COST_IC,
    GameInstance,
    OBJ_SW,
    objective_code,
    objective_value,
)
from .rng import Stream, mix_seed, stream_state

ES_MAX_N = 20


@dataclass
class SolveResult:
    profile: np.ndarray
    value: float
    extra: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# exhaustive search
# ---------------------------------------------------------------------------

def _psne_mask(profiles: np.ndarray, adj: np.ndarray) -> np.ndarray:
    """Rows that are equilibria. covered[i] = some neighbor invests; the
    local characterization is a_i != covered_i for every player."""
    covered = (profiles @ adj > 0).astype(np.int8)
    return np.all(profiles != covered, axis=1)


def _profile_batch(ks: np.ndarray, n: int) -> np.ndarray:
    """Decode encodings into profiles; player i is bit i (player 0 = LSB)."""
    return ((ks[:, None] >> np.arange(n)[None, :]) & 1).astype(np.int8)


def _batch_values(profiles: np.ndarray, adj: np.ndarray, costs: np.ndarray,
                  objective: str) -> np.ndarray:
    covered = (profiles @ adj > 0).astype(np.float64)
    u = profiles * (1.0 - costs)[None, :] + (1 - profiles) * covered
    if objective == OBJ_SW:
        return u.mean(axis=1)
    tot = u.sum(axis=1)
    us = np.sort(u, axis=1)
    n = profiles.shape[1]
    coef = 2.0 * np.arange(1, n + 1) - n - 1.0
    gini_sum = 2.0 * (us * coef[None, :]).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = 1.0 - gini_sum / (2.0 * n * tot)
    return np.where(tot <= 0.0, 1.0, f)


def enumerate_psne(inst: GameInstance) -> np.ndarray:
    """All pure equilibria as an (m, n) int8 array, ascending by encoding."""
    n = inst.n
    if n > ES_MAX_N:
        raise ValueError(f"exhaustive enumeration capped at n={ES_MAX_N}, got {n}")
    adj = inst.graph.dense_adjacency().astype(np.int8)
    rows = []
    for start in range(0, 1 << n, 4096):
        ks = np.arange(start, min(start + 4096, 1 << n), dtype=np.int64)
        profiles = _profile_batch(ks, n)
        rows.append(profiles[_psne_mask(profiles, adj)])
    return np.concatenate(rows, axis=0)


def exhaustive_best_psne(inst: GameInstance, objective: str) -> SolveResult:
    """Best equilibrium by full enumeration of the 2^n profiles (n <= 20).
    Value ties resolve to the lowest profile encoding."""
    n = inst.n
    if n > ES_MAX_N:
        raise ValueError(f"exhaustive search capped at n={ES_MAX_N}, got {n}")
    objective_code(objective)  # validate the name early
    adj = inst.graph.dense_adjacency().astype(np.int8)
    best_val = -np.inf
    best_profile = None
    psne_count = 0
    for start in range(0, 1 << n, 4096):
        ks = np.arange(start, min(start + 4096, 1 << n), dtype=np.int64)
        profiles = _profile_batch(ks, n)
        mask = _psne_mask(profiles, adj)
        if not mask.any():
            continue
        cand = profiles[mask]
        psne_count += len(cand)
        vals = _batch_values(cand, adj.astype(np.float64), inst.costs, objective)
        i = int(np.argmax(vals))  # first max: lowest encoding within the chunk
        if vals[i] > best_val:
            best_val = float(vals[i])
            best_profile = cand[i].copy()
    if best_profile is None:
        raise RuntimeError("no pure equilibrium found; graph invariant violated")
    # report the value through the same code path as every other method
    value = objective_value(inst, best_profile, objective)
    return SolveResult(best_profile, value, {"psne_count": psne_count})


# ---------------------------------------------------------------------------
# best-response dynamics
# ---------------------------------------------------------------------------

def best_response(inst: GameInstance, objective: str, seed: int,
                  max_sweeps: int | None = None) -> SolveResult:
    """Sequential best response from a Bernoulli(1/2) profile to a fixpoint."""
    g = inst.graph
    st = stream_state(mix_seed(seed, 31))
    profile = np.empty(inst.n, dtype=np.int8)
    for i in range(inst.n):
        profile[i] = 1 if rng_uniform(st) < 0.5 else 0
    cap = 10 * inst.n if max_sweeps is None else max_sweeps
    sweeps = br_dynamics(g.indptr, g.indices, profile,
                         np.zeros(inst.n, dtype=np.bool_), st, cap)
    if sweeps < 0:
        raise RuntimeError(f"best response failed to converge in {cap} sweeps")
    return SolveResult(profile, objective_value(inst, profile, objective),
                       {"sweeps": int(sweeps)})


# ---------------------------------------------------------------------------
# payoff-transfer dynamics
# ---------------------------------------------------------------------------

def payoff_transfer(inst: GameInstance, objective: str, seed: int) -> SolveResult:
    """Best response extended with side payments.

    When a sweep reaches an uncovered free-rider whose neighbors all
    best-respond 0 (each is covered by someone else), the player pays its
    cheapest neighbor j that neighbor's cost c_j to invest instead; j accepts
    (c_j back makes it whole) and stays pinned to investing, the payment
    being what bought the commitment. Transfers accumulate in a ledger and
    the objective is evaluated on transfer-adjusted utilities clipped to
    [0, 1]. The endpoint is an equilibrium of the augmented game; with
    transfers in play it need not be an independent set.
    """
    g = inst.graph
    n = inst.n
    stream = Stream(mix_seed(seed, 41))
    profile = np.array([1 if stream.uniform() < 0.5 else 0 for _ in range(n)],
                       dtype=np.int8)
    pinned = np.zeros(n, dtype=np.bool_)
    paid = np.zeros(n, dtype=np.float64)
    received = np.zeros(n, dtype=np.float64)
    order = list(range(n))

    def covered(v: int) -> bool:
        return bool(np.any(profile[g.neighbors(v)] == 1))

    cap = 10 * n
    transfers = 0
    for _sweep in range(cap):
        stream.shuffle(order)
        changed = False
        for i in order:
            if pinned[i]:
                continue
            cov = covered(i)
            if profile[i] == 1:
                if cov:
                    profile[i] = 0
                    changed = True
            elif not cov:
                nbrs = g.neighbors(i)
                if len(nbrs) > 0 and all(covered(int(j)) for j in nbrs):
                    j = int(nbrs[int(np.argmin(inst.costs[nbrs]))])
                    profile[j] = 1
                    pinned[j] = True
                    paid[i] += inst.costs[j]
                    received[j] += inst.costs[j]
                    transfers += 1
                    changed = True
                else:
                    profile[i] = 1
                    changed = True
        if not changed:
            break
    else:
        raise RuntimeError(f"payoff transfer failed to settle in {cap} sweeps")

    base = np.empty(n, dtype=np.float64)
    profile_utilities(g.indptr, g.indices, inst.costs, profile, base)
    adjusted = np.clip(base - paid + received, 0.0, 1.0)
    value = utilities_objective(adjusted, objective)
    return SolveResult(profile, value,
                       {"transfers": transfers,
                        "adjusted_utilities": adjusted,
                        "paid": paid, "received": received})


def utilities_objective(u: np.ndarray, objective: str) -> float:
    """Objective of an explicit utility vector (used by payoff transfer)."""
    code = objective_code(objective)
    n = len(u)
    if code == 0:
        return float(u.mean())
    tot = float(u.sum())
    if tot <= 0.0:
        return 1.0
    us = np.sort(u)
    coef = 2.0 * np.arange(1, n + 1) - n - 1.0
    return float(1.0 - 2.0 * (coef * us).sum() / (2.0 * n * tot))


# ---------------------------------------------------------------------------
# simulated annealing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SaConfig:
    epsilon: float = 10.0
    no_improve_limit: int = 10_000
    step_cutoff: int = 10_000_000

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.no_improve_limit < 1 or self.step_cutoff < 1:
            raise ValueError("limits must be >= 1")


def simulated_annealing(inst: GameInstance, objective: str, seed: int,
                        config: SaConfig = SaConfig(),
                        trace_cap: int = 0) -> SolveResult:
    """Metropolis walk over equilibria; returns the best profile visited.

    trace_cap > 0 records the best-so-far value after each of the first
    trace_cap proposals (tests assert the trace is monotone)."""
    g = inst.graph
    st = stream_state(mix_seed(seed, 21))
    profile = np.zeros(inst.n, dtype=np.int8)
    trace = np.zeros(trace_cap, dtype=np.float64)
    best_val, steps = sa_search(g.indptr, g.indices, inst.costs,
                                objective_code(objective),
                                float(config.epsilon),
                                config.no_improve_limit, config.step_cutoff,
                                st, profile, trace)
    steps = int(steps)
    return SolveResult(profile, float(best_val),
                       {"steps": steps, "trace": trace[:min(steps, trace_cap)].copy()})


# ---------------------------------------------------------------------------
# random completion and greedy heuristics
# ---------------------------------------------------------------------------

def random_equilibrium(inst: GameInstance, objective: str, seed: int) -> SolveResult:
    """Uniform random construction of a maximal independent set."""
    g = inst.graph
    st = stream_state(mix_seed(seed, 51))
    profile = np.zeros(inst.n, dtype=np.int8)
    blocked = np.zeros(inst.n, dtype=np.bool_)
    random_complete(g.indptr, g.indices, blocked, profile, st)
    return SolveResult(profile, objective_value(inst, profile, objective))


def target_hubs(inst: GameInstance, objective: str) -> SolveResult:
    """Deterministic: repeatedly add the unblocked vertex with the highest
    original-graph degree (ties to the lowest index)."""
    g = inst.graph
    profile = np.zeros(inst.n, dtype=np.int8)
    blocked = np.zeros(inst.n, dtype=np.bool_)
    static_score_rollout(g.indptr, g.indices, g.degrees.astype(np.float64),
                         blocked, profile)
    return SolveResult(profile, objective_value(inst, profile, objective))


def target_lowest_cost(inst: GameInstance, objective: str) -> SolveResult:
    """Deterministic: repeatedly add the cheapest unblocked vertex. Only
    meaningful under heterogeneous costs; IC instances are rejected."""
    if inst.cost_setting == COST_IC:
        raise ValueError("lowest-cost heuristic requires heterogeneous costs; "
                         "all costs are identical under IC")
    g = inst.graph
    profile = np.zeros(inst.n, dtype=np.int8)
    blocked = np.zeros(inst.n, dtype=np.bool_)
    static_score_rollout(g.indptr, g.indices, -inst.costs, blocked, profile)
    return SolveResult(profile, objective_value(inst, profile, objective))
