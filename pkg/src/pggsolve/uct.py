"""UCT planning over the set-construction MDP.

Each move runs a fresh tree search of sims_factor * n simulations from the
current state, then commits the most-visited root action (ties to the lowest
index; a seeded random tie-break is available behind a flag). The exploration
scale for move t is cp times the mean of all returns backed up at move t-1's
root (1.0 for the first move), which keeps exploration proportional to the
return scale of the current instance. Rollouts are uniformly random; rewards
are the terminal objective values, so backed-up returns live in [0, 1].

Each move can be recorded as a demonstration: the state, its valid actions,
the simulation budget, and the root visit counts aligned with the actions.
Demonstrations serialize one JSON object per line.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ._kernels import uct_search
from .game import GameInstance, Graph, objective_code, objective_value
from .mdp import BuildState, init_state, is_terminal, step, valid_actions
from .rng import Stream, mix_seed, stream_state

CP_GRID = (0.05, 0.1, 0.25, 0.5, 1.0, 2.5)


@dataclass(frozen=True)
class UctConfig:
    cp: float = 0.5
    sims_factor: int = 20
    random_ties: bool = False

    def __post_init__(self):
        if self.cp <= 0.0:
            raise ValueError(f"cp must be positive, got {self.cp}")
        if self.sims_factor < 1:
            raise ValueError(f"sims_factor must be >= 1, got {self.sims_factor}")


@dataclass
class RootStats:
    """Root-level outcome of one search."""

    actions: np.ndarray   # valid actions at the root, ascending
    visits: np.ndarray    # child visit counts, aligned with actions
    returns: np.ndarray   # summed backed-up returns, aligned with actions
    n_sims: int
    mean_return: float    # total backed-up return at the root / n_sims


@dataclass
class Demonstration:
    """One recorded planning move."""

    instance_id: str
    n: int
    edges: tuple
    independent_set: list[int]
    valid_actions: list[int]
    n_sims: int
    visit_counts: list[int]


@dataclass
class PlanResult:
    members: list[int]
    value: float
    demos: list[Demonstration]
    root_means: list[float]   # mean backed-up return at each move's root


def uct_score(child_return_sum: float, child_visits: int,
              parent_visits: int, cp: float) -> float:
    """Selection score: mean return plus 2*cp*sqrt(2 ln(parent)/child)."""
    if child_visits < 1 or parent_visits < child_visits:
        raise ValueError("need child_visits >= 1 and parent_visits >= child_visits")
    mean = child_return_sum / child_visits
    return mean + 2.0 * cp * float(np.sqrt(2.0 * np.log(parent_visits) / child_visits))


def search_root(state: BuildState, objective: str, n_sims: int,
                cp_eff: float, rng_state: np.ndarray,
                random_ties: bool = False) -> RootStats:
    """Run one tree search from ``state``; the rng state advances in place."""
    if is_terminal(state):
        raise ValueError("cannot search from a terminal state")
    if n_sims < 1:
        raise ValueError(f"n_sims must be >= 1, got {n_sims}")
    g = state.inst.graph
    out_visits = np.zeros(state.inst.n, dtype=np.int64)
    out_returns = np.zeros(state.inst.n, dtype=np.float64)
    total = uct_search(g.indptr, g.indices, state.inst.costs,
                       objective_code(objective),
                       state.blocked.copy(), state.profile(),
                       n_sims, float(cp_eff), bool(random_ties),
                       rng_state, out_visits, out_returns)
    acts = valid_actions(state)
    return RootStats(actions=acts,
                     visits=out_visits[acts].copy(),
                     returns=out_returns[acts].copy(),
                     n_sims=n_sims,
                     mean_return=float(total) / n_sims)


def robust_child(stats: RootStats, random_ties: bool = False,
                 stream: Stream | None = None) -> int:
    """Most-visited root action; ties to lowest index, or a seeded draw."""
    best = int(np.max(stats.visits))
    tied = [int(a) for a, v in zip(stats.actions, stats.visits) if v == best]
    if random_ties and len(tied) > 1:
        if stream is None:
            raise ValueError("random tie-break needs a stream")
        return tied[stream.below(len(tied))]
    return tied[0]


def plan_episode(inst: GameInstance, objective: str, config: UctConfig,
                 seed: int, collect_demos: bool = False) -> PlanResult:
    """Plan a full episode; returns the constructed set and its value."""
    rng_state = stream_state(mix_seed(seed, 11))
    tie_stream = Stream(mix_seed(seed, 12)) if config.random_ties else None
    n_sims = config.sims_factor * inst.n
    state = init_state(inst)
    demos: list[Demonstration] = []
    root_means: list[float] = []
    cp_mult = 1.0
    while not is_terminal(state):
        stats = search_root(state, objective, n_sims, config.cp * cp_mult,
                            rng_state, config.random_ties)
        if collect_demos:
            demos.append(Demonstration(
                instance_id=inst.instance_id,
                n=inst.n,
                edges=inst.graph.edges,
                independent_set=list(state.members),
                valid_actions=[int(a) for a in stats.actions],
                n_sims=n_sims,
                visit_counts=[int(v) for v in stats.visits],
            ))
        action = robust_child(stats, config.random_ties, tie_stream)
        cp_mult = stats.mean_return  # standardizes exploration for the next move
        root_means.append(stats.mean_return)
        state, _ = step(state, action, objective)
    value = objective_value(inst, state.profile(), objective)
    return PlanResult(members=list(state.members), value=value,
                      demos=demos, root_means=root_means)


# ---------------------------------------------------------------------------
# demonstration files (one JSON object per line)
# ---------------------------------------------------------------------------

def demo_to_dict(d: Demonstration) -> dict:
    return {
        "instance_id": d.instance_id,
        "n": d.n,
        "edges": [[u, v] for u, v in d.edges],
        "independent_set": list(d.independent_set),
        "valid_actions": list(d.valid_actions),
        "n_sims": d.n_sims,
        "visit_counts": list(d.visit_counts),
    }


def demo_from_dict(rec: dict) -> Demonstration:
    try:
        return Demonstration(
            instance_id=str(rec["instance_id"]),
            n=int(rec["n"]),
            edges=tuple((int(u), int(v)) for u, v in rec["edges"]),
            independent_set=[int(v) for v in rec["independent_set"]],
            valid_actions=[int(v) for v in rec["valid_actions"]],
            n_sims=int(rec["n_sims"]),
            visit_counts=[int(v) for v in rec["visit_counts"]],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed demonstration record: {exc}") from exc


def write_demos(path: str, demos: list[Demonstration]) -> None:
    with open(path, "w") as fh:
        for d in demos:
            fh.write(json.dumps(demo_to_dict(d), sort_keys=True,
                                separators=(",", ":")) + "\n")


def read_demos(path: str) -> list[Demonstration]:
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(demo_from_dict(json.loads(line)))
    return out


def demo_graph(d: Demonstration, _cache: dict = {}) -> Graph:
    """Graph of a demonstration; cached per (instance_id, n)."""
    key = (d.instance_id, d.n)
    g = _cache.get(key)
    if g is None or g.edges != tuple(d.edges):
        g = Graph(d.n, d.edges)
        _cache[key] = g
    return g
