"""Command-line interface.

Subcommands: generate, plan, baseline, collect, train, rollout, evaluate,
report. Usage errors exit with status 2 (argparse), runtime failures print
one diagnostic line to stderr and exit with status 1.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import baselines as B
from .backend import backend_name
from .game import COST_SETTINGS, OBJECTIVES, set_from_profile
from .gil import (
    K_GRID,
    LR_GRID,
    STRATEGIES,
    TrainConfig,
    greedy_rollout,
    init_params,
    load_model,
    save_model,
    train_policy,
)
from .graphgen import (
    FamilyConfig,
    MODELS,
    SPLITS,
    ensure_dataset,
    make_instance,
    read_manifest,
    resolve_data_root,
)
from .harness import (
    ALL_METHODS,
    ExperimentSpec,
    load_results,
    mean_value_table,
    render_markdown,
    run_experiment,
    timing_report,
    win_rate_table,
)
from .uct import UctConfig, plan_episode, read_demos, write_demos

BASELINE_METHODS = ("ES", "BR", "PT", "SA", "Random", "TH", "TLC")


def _add_family(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", required=True, choices=MODELS)
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--cost", required=True, choices=COST_SETTINGS)
    p.add_argument("--master-seed", type=int, default=0)


def _add_instance(p: argparse.ArgumentParser) -> None:
    _add_family(p)
    p.add_argument("--split", default="test", choices=SPLITS)
    p.add_argument("--index", type=int, default=0)


def _instance(args):
    cfg = FamilyConfig(args.model, args.n, args.cost)
    return make_instance(cfg, args.split, args.index, args.master_seed)


def _csv_list(text: str) -> list:
    return [t.strip() for t in text.split(",") if t.strip()]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_generate(args) -> int:
    cfg = FamilyConfig(args.model, args.n, args.cost)
    counts = {"train": args.train, "eval": args.eval, "test": args.test}
    root = resolve_data_root(args.root)
    ensure_dataset(root, cfg, counts, args.master_seed)
    manifest = read_manifest(root, cfg)
    print(f"dataset {cfg.dir_name()} at {root}: "
          + " ".join(f"{s}={manifest['counts'][s]}" for s in SPLITS))
    return 0


def cmd_plan(args) -> int:
    inst = _instance(args)
    cfg = UctConfig(cp=args.cp, sims_factor=args.sims_factor)
    res = plan_episode(inst, args.objective, cfg, args.seed,
                       collect_demos=args.demos is not None)
    members = sorted(res.members)
    print(f"instance {inst.instance_id} objective {args.objective} "
          f"value {res.value:.6f} set {members}")
    if args.demos is not None:
        write_demos(args.demos, res.demos)
        print(f"wrote {len(res.demos)} demonstrations to {args.demos}")
    return 0


def cmd_baseline(args) -> int:
    inst = _instance(args)
    m = args.method
    if m == "ES":
        res = B.exhaustive_best_psne(inst, args.objective)
    elif m == "BR":
        res = B.best_response(inst, args.objective, args.seed)
    elif m == "PT":
        res = B.payoff_transfer(inst, args.objective, args.seed)
    elif m == "SA":
        res = B.simulated_annealing(inst, args.objective, args.seed)
    elif m == "Random":
        res = B.random_equilibrium(inst, args.objective, args.seed)
    elif m == "TH":
        res = B.target_hubs(inst, args.objective)
    else:
        res = B.target_lowest_cost(inst, args.objective)
    members = sorted(set_from_profile(res.profile))
    extras = {k: v for k, v in res.extra.items()
              if isinstance(v, (int, float, str))}
    tail = f" {extras}" if extras else ""
    print(f"instance {inst.instance_id} method {m} objective {args.objective} "
          f"value {res.value:.6f} set {members}{tail}")
    return 0


def cmd_collect(args) -> int:
    cfg = FamilyConfig(args.model, args.n, args.cost)
    ucfg = UctConfig(cp=args.cp, sims_factor=args.sims_factor)
    demos = []
    for idx in range(args.count):
        inst = make_instance(cfg, args.split, idx, args.master_seed)
        res = plan_episode(inst, args.objective, ucfg,
                           args.seed + idx, collect_demos=True)
        demos.extend(res.demos)
    write_demos(args.out, demos)
    print(f"collected {len(demos)} demonstrations from {args.count} episodes "
          f"into {args.out}")
    return 0


def cmd_train(args) -> int:
    demos = []
    for path in args.demos:
        demos.extend(read_demos(path))
    cfg = FamilyConfig(args.model, args.n, args.cost)
    val = [make_instance(cfg, "eval", k, args.master_seed)
           for k in range(args.val_count)]
    params = init_params(args.seed, embed_dim=args.embed_dim,
                         hidden_dim=args.hidden_dim,
                         proto_dim=args.embed_dim, K=args.K)
    tcfg = TrainConfig(lr=args.lr, steps=args.steps,
                       batch_size=args.batch_size,
                       validate_every=args.validate_every,
                       strategy=args.strategy, seed=args.seed)
    res = train_policy(demos, val, args.objective, params, tcfg)
    digest = save_model(args.out, res.params)
    print(f"trained on {len(demos)} demonstrations; best validation "
          f"{res.best_value:.6f} at step {res.best_step}; "
          f"model {args.out} hash {digest[:16]}")
    if args.curve is not None:
        with open(args.curve, "w") as fh:
            json.dump({"curve": res.curve}, fh)
        print(f"wrote validation curve to {args.curve}")
    return 0


def cmd_rollout(args) -> int:
    inst = _instance(args)
    params = load_model(args.model_file)
    res = greedy_rollout(inst, params, args.objective)
    members = sorted(set_from_profile(res.profile))
    print(f"instance {inst.instance_id} objective {args.objective} "
          f"value {res.value:.6f} set {members}")
    return 0


def cmd_evaluate(args) -> int:
    spec = ExperimentSpec(
        methods=tuple(_csv_list(args.methods)),
        models=tuple(_csv_list(args.models)),
        sizes=tuple(int(s) for s in _csv_list(args.sizes)),
        cost_settings=tuple(_csv_list(args.costs)),
        objectives=tuple(_csv_list(args.objectives)),
        seeds=tuple(int(s) for s in _csv_list(args.seeds)),
        eval_count=args.eval_count,
        test_count=args.test_count,
        master_seed=args.master_seed,
        data_root=args.root,
        out_dir=args.out_dir,
        uct_sims_factor=args.sims_factor,
        gil_model=args.gil_model,
    )
    summary = run_experiment(spec)
    print(f"[{backend_name()}] wrote {summary['rows']} rows to {summary['csv']}")
    for fam, info in summary["tuned"].items():
        print(f"tuned {fam}: cp={info['cp']}")
    for method, fam, reason in summary["skipped"]:
        print(f"skipped {method} on {fam}: {reason}")
    return 0


def cmd_report(args) -> int:
    df = load_results(args.csv)
    tables = {
        "mean_values.md": mean_value_table(df),
        "win_rates.md": win_rate_table(df, args.master_seed),
        "timings.md": timing_report(df),
    }
    for name, table in tables.items():
        text = render_markdown(table)
        print(f"## {name[:-3]}\n{text}")
        if args.out_dir is not None:
            os.makedirs(args.out_dir, exist_ok=True)
            with open(os.path.join(args.out_dir, name), "w") as fh:
                fh.write(text)
    if args.out_dir is not None:
        print(f"wrote {len(tables)} tables to {args.out_dir}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pggsolve",
        description="Equilibrium selection for best-shot public goods games "
                    "on graphs.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="create or extend a dataset family")
    _add_family(p)
    p.add_argument("--train", type=int, default=30)
    p.add_argument("--eval", type=int, default=10)
    p.add_argument("--test", type=int, default=30)
    p.add_argument("--root", default=None)
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("plan", help="search one instance")
    _add_instance(p)
    p.add_argument("--objective", required=True, choices=OBJECTIVES)
    p.add_argument("--cp", type=float, default=0.5)
    p.add_argument("--sims-factor", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--demos", default=None,
                   help="write per-move demonstrations to this jsonl file")
    p.set_defaults(fn=cmd_plan)

    p = sub.add_parser("baseline", help="run one baseline method")
    _add_instance(p)
    p.add_argument("--method", required=True, choices=BASELINE_METHODS)
    p.add_argument("--objective", required=True, choices=OBJECTIVES)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_baseline)

    p = sub.add_parser("collect", help="batch demonstration collection")
    _add_family(p)
    p.add_argument("--split", default="train", choices=SPLITS)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--objective", required=True, choices=OBJECTIVES)
    p.add_argument("--cp", type=float, default=0.5)
    p.add_argument("--sims-factor", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_collect)

    p = sub.add_parser("train", help="imitation-train a policy from demos")
    _add_family(p)
    p.add_argument("--demos", nargs="+", required=True)
    p.add_argument("--objective", required=True, choices=OBJECTIVES)
    p.add_argument("--val-count", type=int, default=10)
    p.add_argument("--lr", type=float, default=1e-3,
                   help=f"tuning grid: {LR_GRID}")
    p.add_argument("--K", type=int, default=3,
                   help=f"propagation rounds, grid: {K_GRID}")
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--batch-size", type=int, default=5)
    p.add_argument("--validate-every", type=int, default=50)
    p.add_argument("--strategy", default="separate", choices=STRATEGIES)
    p.add_argument("--embed-dim", type=int, default=64)
    p.add_argument("--hidden-dim", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--curve", default=None,
                   help="also write the validation curve as json")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("rollout", help="greedy policy episode on one instance")
    _add_instance(p)
    p.add_argument("--model-file", required=True)
    p.add_argument("--objective", required=True, choices=OBJECTIVES)
    p.set_defaults(fn=cmd_rollout)

    p = sub.add_parser("evaluate", help="full method sweep to results.csv")
    p.add_argument("--methods",
                   default="UCT,ES,BR,PT,SA,Random,TH,TLC",
                   help=f"comma list from {ALL_METHODS}")
    p.add_argument("--models", default="ER,BA,WS")
    p.add_argument("--sizes", default="15,25")
    p.add_argument("--costs", default="IC,HC")
    p.add_argument("--objectives", default="sw,fairness")
    p.add_argument("--seeds", default="0,1,2")
    p.add_argument("--eval-count", type=int, default=10)
    p.add_argument("--test-count", type=int, default=30)
    p.add_argument("--master-seed", type=int, default=0)
    p.add_argument("--sims-factor", type=int, default=20)
    p.add_argument("--root", default=None)
    p.add_argument("--out-dir", default="results")
    p.add_argument("--gil-model", default=None)
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("report", help="render tables from results.csv")
    p.add_argument("--csv", required=True)
    p.add_argument("--out-dir", default=None)
    p.add_argument("--master-seed", type=int, default=0,
                   help="seed for win-rate tie breaking")
    p.set_defaults(fn=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, RuntimeError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
