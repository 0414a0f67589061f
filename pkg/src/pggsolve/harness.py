"""Experiment harness: datasets, tuning, method runs, tables.

A run walks (model, size, cost) x objective x method x seed, solves every
test instance, and accumulates rows into results.csv. Each combination is
one shard file with a done-marker so an interrupted run resumes where it
stopped. Search hyperparameters are tuned on the eval split only; the
harness asserts eval and test share no instance before any method runs.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from . import baselines as B
from .game import GameInstance, OBJECTIVES, objective_code
from .gil import PolicyParams, greedy_rollout, load_model
from .graphgen import (
    FamilyConfig,
    MODELS,
    ensure_dataset,
    load_split,
    resolve_data_root,
)
from .rng import COST_TAGS, MODEL_TAGS, Stream, mix_seed
from .uct import CP_GRID, UctConfig, plan_episode

RESULT_COLUMNS = ("method", "model", "n", "cost_setting", "objective",
                  "seed", "instance_id", "value", "wall_time_ms",
                  "hyperparams_json")

ALL_METHODS = ("UCT", "ES", "BR", "PT", "SA", "Random", "TH", "TLC", "GIL")

METHOD_TAGS = {m: i + 1 for i, m in enumerate(ALL_METHODS)}


@dataclass(frozen=True)
class ExperimentSpec:
    methods: tuple = ("UCT", "ES", "BR", "PT", "SA", "Random", "TH", "TLC")
    models: tuple = ("ER", "BA", "WS")
    sizes: tuple = (15, 25)
    cost_settings: tuple = ("IC", "HC")
    objectives: tuple = OBJECTIVES
    seeds: tuple = (0, 1, 2)
    eval_count: int = 10
    test_count: int = 30
    train_count: int = 0
    master_seed: int = 0
    data_root: str | None = None
    out_dir: str = "results"
    uct_sims_factor: int = 20
    sa_config: B.SaConfig = B.SaConfig()
    gil_model: str | None = None

    def __post_init__(self):
        for m in self.methods:
            if m not in ALL_METHODS:
                raise ValueError(f"unknown method {m!r}; choose from {ALL_METHODS}")
        for g in self.models:
            if g not in MODELS:
                raise ValueError(f"unknown graph model {g!r}")
        for o in self.objectives:
            objective_code(o)
        if self.eval_count < 1 or self.test_count < 1:
            raise ValueError("eval_count and test_count must be >= 1")
        if not self.seeds:
            raise ValueError("at least one seed is required")


def _family_tags(cfg: FamilyConfig) -> tuple:
    return (MODEL_TAGS[cfg.model], cfg.n, COST_TAGS[cfg.cost_setting])


# ---------------------------------------------------------------------------
# tuning (eval split only)
# ---------------------------------------------------------------------------

def tune_uct_cp(cfg: FamilyConfig, objective: str, eval_instances,
                spec: ExperimentSpec) -> tuple[float, dict]:
    """Mean eval value per exploration constant; ties keep the lower cp."""
    tags = _family_tags(cfg)
    obj = objective_code(objective)
    means = {}
    best_cp, best_val = None, -np.inf
    for ci, cp in enumerate(CP_GRID):
        ucfg = UctConfig(cp=cp, sims_factor=spec.uct_sims_factor)
        acc = 0.0
        for idx, inst in enumerate(eval_instances):
            ep_seed = mix_seed(spec.master_seed, 91, *tags, obj, ci, idx)
            acc += plan_episode(inst, objective, ucfg, ep_seed).value
        means[cp] = acc / len(eval_instances)
        if means[cp] > best_val:
            best_val = means[cp]
            best_cp = cp
    return best_cp, means


# ---------------------------------------------------------------------------
# single-method dispatch
# ---------------------------------------------------------------------------

def run_method(method: str, inst: GameInstance, objective: str, ep_seed: int,
               context: dict) -> tuple[float, dict]:
    """Solve one instance; returns (value, hyperparameters recorded)."""
    if method == "UCT":
        cp = context["cp"]
        cfg = UctConfig(cp=cp, sims_factor=context["sims_factor"])
        res = plan_episode(inst, objective, cfg, ep_seed)
        return res.value, {"cp": cp, "sims_factor": cfg.sims_factor}
    if method == "ES":
        return B.exhaustive_best_psne(inst, objective).value, {}
    if method == "BR":
        return B.best_response(inst, objective, ep_seed).value, {}
    if method == "PT":
        return B.payoff_transfer(inst, objective, ep_seed).value, {}
    if method == "SA":
        sa: B.SaConfig = context["sa_config"]
        res = B.simulated_annealing(inst, objective, ep_seed, sa)
        return res.value, {"epsilon": sa.epsilon,
                           "no_improve_limit": sa.no_improve_limit,
                           "step_cutoff": sa.step_cutoff}
    if method == "Random":
        return B.random_equilibrium(inst, objective, ep_seed).value, {}
    if method == "TH":
        return B.target_hubs(inst, objective).value, {}
    if method == "TLC":
        return B.target_lowest_cost(inst, objective).value, {}
    if method == "GIL":
        params: PolicyParams = context["gil_params"]
        res = greedy_rollout(inst, params, objective)
        return res.value, {"model_hash": context["gil_hash"],
                           "K": params.K}
    raise ValueError(f"unknown method {method!r}")


def method_skip_reason(method: str, cfg: FamilyConfig,
                       spec: ExperimentSpec) -> str | None:
    """Combinations that cannot run: skipped with a recorded reason rather
    than aborting the sweep."""
    if method == "ES" and cfg.n > B.ES_MAX_N:
        return f"exhaustive search capped at n={B.ES_MAX_N}"
    if method == "TLC" and cfg.cost_setting == "IC":
        return "lowest-cost heuristic undefined under identical costs"
    if method == "GIL" and spec.gil_model is None:
        return "no policy model configured"
    return None


# ---------------------------------------------------------------------------
# sweep with shard/marker resume
# ---------------------------------------------------------------------------

def _shard_name(method, cfg: FamilyConfig, objective, seed) -> str:
    return f"{method}_{cfg.dir_name()}_{objective}_{seed}.csv"


def _format_row(row: dict) -> str:
    parts = [str(row["method"]), str(row["model"]), str(row["n"]),
             str(row["cost_setting"]), str(row["objective"]),
             str(row["seed"]), str(row["instance_id"]),
             repr(float(row["value"])),
             f"{row['wall_time_ms']:.3f}",
             json.dumps(row["hyperparams_json"], sort_keys=True)]
    out = []
    for p in parts:
        if "," in p or '"' in p:
            out.append('"' + p.replace('"', '""') + '"')
        else:
            out.append(p)
    return ",".join(out)


def _run_shard(method: str, cfg: FamilyConfig, objective: str, seed: int,
               instances, context: dict, spec: ExperimentSpec,
               path: str) -> int:
    tags = _family_tags(cfg)
    obj = objective_code(objective)
    mtag = METHOD_TAGS[method]
    # warmup so compilation cost lands outside every timed episode
    warm_seed = mix_seed(spec.master_seed, 99, mtag, seed, *tags, obj)
    run_method(method, instances[0], objective, warm_seed, context)
    lines = []
    for idx, inst in enumerate(instances):
        ep_seed = mix_seed(spec.master_seed, seed, mtag, *tags, obj, idx)
        t0 = time.perf_counter()
        value, hp = run_method(method, inst, objective, ep_seed, context)
        dt_ms = (time.perf_counter() - t0) * 1000.0
        lines.append(_format_row({
            "method": method, "model": cfg.model, "n": cfg.n,
            "cost_setting": cfg.cost_setting, "objective": objective,
            "seed": seed, "instance_id": inst.instance_id,
            "value": value, "wall_time_ms": dt_ms, "hyperparams_json": hp,
        }))
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)
    return len(lines)


def run_experiment(spec: ExperimentSpec) -> dict:
    """Full sweep. Returns a summary with the results.csv path, tuned
    hyperparameters, row count, and skipped combinations."""
    root = resolve_data_root(spec.data_root)
    os.makedirs(spec.out_dir, exist_ok=True)
    shard_dir = os.path.join(spec.out_dir, "shards")
    os.makedirs(shard_dir, exist_ok=True)

    context_base: dict = {"sims_factor": spec.uct_sims_factor,
                          "sa_config": spec.sa_config}
    if spec.gil_model is not None:
        params = load_model(spec.gil_model)
        with open(spec.gil_model) as fh:
            context_base["gil_hash"] = json.load(fh)["content_hash"]
        context_base["gil_params"] = params

    counts = {"train": spec.train_count, "eval": spec.eval_count,
              "test": spec.test_count}
    tuned: dict = {}
    skipped: list = []
    shard_paths: list = []

    for model in spec.models:
        for n in spec.sizes:
            for cost in spec.cost_settings:
                cfg = FamilyConfig(model, n, cost)
                ensure_dataset(root, cfg, counts, spec.master_seed)
                eval_insts = load_split(root, cfg, "eval", spec.eval_count)
                test_insts = load_split(root, cfg, "test", spec.test_count)
                eval_ids = {i.instance_id for i in eval_insts}
                test_ids = {i.instance_id for i in test_insts}
                if eval_ids & test_ids:
                    raise RuntimeError(
                        f"tuning leak: eval and test overlap in {cfg.dir_name()}")
                for objective in spec.objectives:
                    fam_key = f"{cfg.dir_name()}/{objective}"
                    if "UCT" in spec.methods:
                        cp, means = tune_uct_cp(cfg, objective, eval_insts, spec)
                        tuned[fam_key] = {"cp": cp, "eval_means": means}
                    for method in spec.methods:
                        reason = method_skip_reason(method, cfg, spec)
                        if reason is not None:
                            skipped.append((method, fam_key, reason))
                            continue
                        context = dict(context_base)
                        if method == "UCT":
                            context["cp"] = tuned[fam_key]["cp"]
                        for seed in spec.seeds:
                            name = _shard_name(method, cfg, objective, seed)
                            path = os.path.join(shard_dir, name)
                            marker = path + ".done"
                            if os.path.exists(marker) and os.path.exists(path):
                                shard_paths.append(path)
                                continue
                            rows = _run_shard(method, cfg, objective, seed,
                                              test_insts, context, spec, path)
                            with open(marker, "w") as fh:
                                fh.write(f"{rows}\n")
                            shard_paths.append(path)

    csv_path = os.path.join(spec.out_dir, "results.csv")
    total = 0
    with open(csv_path + ".tmp", "w") as out:
        out.write(",".join(RESULT_COLUMNS) + "\n")
        for path in shard_paths:
            with open(path) as fh:
                text = fh.read()
            total += text.count("\n")
            out.write(text)
    os.replace(csv_path + ".tmp", csv_path)
    return {"csv": csv_path, "rows": total, "tuned": tuned,
            "skipped": skipped}


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

GROUP_KEYS = ["method", "model", "n", "cost_setting", "objective"]


def load_results(csv_path: str) -> pd.DataFrame:
    return pd.read_csv(csv_path)


def mean_value_table(df: pd.DataFrame) -> pd.DataFrame:
    """Per-seed instance means, then across seeds: mean and population
    standard deviation (ddof=0)."""
    per_seed = (df.groupby(GROUP_KEYS + ["seed"], sort=True)["value"]
                .mean().reset_index())
    g = per_seed.groupby(GROUP_KEYS, sort=True)["value"]
    out = g.agg(mean="mean", std=lambda s: s.std(ddof=0)).reset_index()
    out["pretty"] = [f"{m:.3f} ± {s:.3f}" for m, s in zip(out["mean"], out["std"])]
    return out


def win_rate_table(df: pd.DataFrame, master_seed: int = 0) -> pd.DataFrame:
    """Fraction of test instances each method wins within its family; exact
    value ties are broken by a seeded coin."""
    fam_keys = ["model", "n", "cost_setting", "objective"]
    records = []
    for fam, block in df.groupby(fam_keys, sort=True):
        model, n, cost, objective = fam
        tags = (MODEL_TAGS[model], int(n), COST_TAGS[cost],
                objective_code(objective))
        methods = sorted(block["method"].unique())
        wins = {m: 0 for m in methods}
        rounds = 0
        for seed, sblock in block.groupby("seed", sort=True):
            stream = Stream(mix_seed(master_seed, 101, *tags, int(seed)))
            pivot = sblock.pivot_table(index="instance_id", columns="method",
                                       values="value", aggfunc="first")
            for iid in sorted(pivot.index):
                vals = pivot.loc[iid]
                best = vals.max()
                winners = sorted(vals.index[vals == best])
                pick = winners[stream.below(len(winners))] if len(winners) > 1 \
                    else winners[0]
                wins[pick] += 1
                rounds += 1
        for m in methods:
            records.append({"model": model, "n": n, "cost_setting": cost,
                            "objective": objective, "method": m,
                            "win_rate": wins[m] / rounds})
    return pd.DataFrame.from_records(records)


def timing_report(df: pd.DataFrame) -> pd.DataFrame:
    g = df.groupby(["method", "model", "n"], sort=True)["wall_time_ms"]
    return g.agg(mean_ms="mean", median_ms="median",
                 episodes="count").reset_index()


def render_markdown(df: pd.DataFrame, float_fmt: str = "{:.4f}") -> str:
    """Small fixed-width markdown renderer (keeps pandas' optional
    third-party table dependencies out)."""
    cols = list(df.columns)

    def fmt(x):
        if isinstance(x, float) and not isinstance(x, bool):
            return float_fmt.format(x)
        return str(x)

    rows = [[fmt(v) for v in rec] for rec in df.itertuples(index=False)]
    widths = [max(len(c), *(len(r[i]) for r in rows)) if rows else len(c)
              for i, c in enumerate(cols)]
    head = "| " + " | ".join(c.ljust(w) for c, w in zip(cols, widths)) + " |"
    sep = "| " + " | ".join("-" * w for w in widths) + " |"
    body = ["| " + " | ".join(v.ljust(w) for v, w in zip(r, widths)) + " |"
            for r in rows]
    return "\n".join([head, sep] + body) + "\n"
