"""Best-shot public goods games on undirected graphs.

A game instance is a simple graph plus a cost vector c in (0,1)^n. Actions are
binary (invest / free-ride). An investor gets 1 - c_i; a non-investor gets 1
if some neighbor invests and 0 otherwise. Pure equilibria of this game are
exactly the maximal independent sets of the graph: investors form an
independent set (no investor tolerates an investing neighbor) whose closed
neighborhoods cover everyone (every free-rider is adjacent to an investor).

Two scalar objectives rank equilibria: "sw", the mean utility, and
"fairness", one minus the Gini coefficient of the utility vector (1.0 when
all utilities are zero, the maximally equal edge case). Both lie in [0, 1].
"""

from __future__ import annotations

import numpy as np

from ._kernels import (
    OBJ_FAIR_CODE,
    OBJ_SW_CODE,
    profile_objective,
    profile_utilities,
)

OBJ_SW = "sw"
OBJ_FAIR = "fairness"
OBJECTIVES = (OBJ_SW, OBJ_FAIR)
OBJ_CODES = {OBJ_SW: OBJ_SW_CODE, OBJ_FAIR: OBJ_FAIR_CODE}

COST_IC = "IC"
COST_HC = "HC"
COST_SETTINGS = (COST_IC, COST_HC)


def objective_code(objective: str) -> int:
    try:
        return OBJ_CODES[objective]
    except KeyError:
        raise ValueError(f"unknown objective {objective!r}; expected one of {OBJECTIVES}")


class Graph:
    """Immutable simple undirected graph on vertices 0..n-1, CSR adjacency."""

    __slots__ = ("n", "edges", "indptr", "indices", "degrees", "_dense")

    def __init__(self, n: int, edges):
        if n < 1:
            raise ValueError(f"need at least one vertex, got n={n}")
        canon = []
        seen = set()
        for u, v in edges:
            u = int(u)
            v = int(v)
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range for n={n}")
            if u > v:
                u, v = v, u
            if (u, v) in seen:
                raise ValueError(f"duplicate edge ({u},{v})")
            seen.add((u, v))
            canon.append((u, v))
        canon.sort()
        self.n = n
        self.edges = tuple(canon)
        deg = np.zeros(n, dtype=np.int64)
        for u, v in canon:
            deg[u] += 1
            deg[v] += 1
        self.degrees = deg
        self.indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(deg, out=self.indptr[1:])
        self.indices = np.empty(int(self.indptr[-1]), dtype=np.int64)
        fill = self.indptr[:-1].copy()
        for u, v in canon:
            self.indices[fill[u]] = v
            fill[u] += 1
            self.indices[fill[v]] = u
            fill[v] += 1
        # neighbor lists sorted ascending (edges are canonically sorted)
        for v in range(n):
            self.indices[self.indptr[v]:self.indptr[v + 1]].sort()
        self._dense = None

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def dense_adjacency(self) -> np.ndarray:
        """Symmetric float64 (n,n) adjacency; cached."""
        if self._dense is None:
            a = np.zeros((self.n, self.n), dtype=np.float64)
            for u, v in self.edges:
                a[u, v] = 1.0
                a[v, u] = 1.0
            self._dense = a
        return self._dense


class GameInstance:
    """A graph, a cost vector in (0,1)^n, and identifying metadata."""

    __slots__ = ("graph", "costs", "cost_setting", "instance_id")

    def __init__(self, graph: Graph, costs, cost_setting: str, instance_id: str):
        costs = np.asarray(costs, dtype=np.float64)
        if costs.shape != (graph.n,):
            raise ValueError(f"costs shape {costs.shape} != ({graph.n},)")
        if not np.all((costs > 0.0) & (costs < 1.0)):
            raise ValueError("costs must lie strictly inside (0, 1)")
        if cost_setting not in COST_SETTINGS:
            raise ValueError(f"unknown cost setting {cost_setting!r}")
        self.graph = graph
        self.costs = costs
        self.cost_setting = cost_setting
        self.instance_id = instance_id

    @property
    def n(self) -> int:
        return self.graph.n


def _check_profile(n: int, profile) -> np.ndarray:
    a = np.asarray(profile)
    if a.shape != (n,):
        raise ValueError(f"profile shape {a.shape} != ({n},)")
    if not np.all((a == 0) | (a == 1)):
        raise ValueError("profile entries must be 0 or 1")
    return a.astype(np.int8)


def utilities(inst: GameInstance, profile) -> np.ndarray:
    """Per-player utilities of the profile."""
    p = _check_profile(inst.n, profile)
    out = np.empty(inst.n, dtype=np.float64)
    profile_utilities(inst.graph.indptr, inst.graph.indices, inst.costs, p, out)
    return out


def social_welfare(inst: GameInstance, profile) -> float:
    p = _check_profile(inst.n, profile)
    return float(profile_objective(inst.graph.indptr, inst.graph.indices,
                                   inst.costs, p, OBJ_SW_CODE))


def fairness(inst: GameInstance, profile) -> float:
    """1 - Gini(utilities); 1.0 when every utility is zero."""
    p = _check_profile(inst.n, profile)
    return float(profile_objective(inst.graph.indptr, inst.graph.indices,
                                   inst.costs, p, OBJ_FAIR_CODE))


def objective_value(inst: GameInstance, profile, objective: str) -> float:
    p = _check_profile(inst.n, profile)
    return float(profile_objective(inst.graph.indptr, inst.graph.indices,
                                   inst.costs, p, objective_code(objective)))


def is_psne(inst: GameInstance, profile) -> bool:
    """Pure equilibrium via the local characterization: an investor has no
    investing neighbor; a free-rider has at least one."""
    p = _check_profile(inst.n, profile)
    g = inst.graph
    for i in range(g.n):
        has_inv = bool(np.any(p[g.neighbors(i)] == 1))
        if p[i] == 1 and has_inv:
            return False
        if p[i] == 0 and not has_inv:
            return False
    return True


def is_independent_set(graph: Graph, members) -> bool:
    mset = set(int(v) for v in members)
    for v in mset:
        if not (0 <= v < graph.n):
            raise ValueError(f"vertex {v} out of range")
    for u, v in graph.edges:
        if u in mset and v in mset:
            return False
    return True


def is_maximal_independent_set(graph: Graph, members) -> bool:
    """Independent and not extendable: every outside vertex has a neighbor in."""
    mset = set(int(v) for v in members)
    if not is_independent_set(graph, mset):
        return False
    for v in range(graph.n):
        if v in mset:
            continue
        if not any(int(u) in mset for u in graph.neighbors(v)):
            return False
    return True


def profile_from_set(n: int, members) -> np.ndarray:
    p = np.zeros(n, dtype=np.int8)
    for v in members:
        v = int(v)
        if not (0 <= v < n):
            raise ValueError(f"vertex {v} out of range for n={n}")
        p[v] = 1
    return p


def set_from_profile(profile) -> list[int]:
    return [int(v) for v in np.flatnonzero(np.asarray(profile) == 1)]


# ---------------------------------------------------------------------------
# serialization (one JSON object per instance)
# ---------------------------------------------------------------------------

def instance_to_dict(inst: GameInstance) -> dict:
    return {
        "n": inst.n,
        "edges": [[u, v] for u, v in inst.graph.edges],
        "costs": [float(c) for c in inst.costs],
        "cost_setting": inst.cost_setting,
        "instance_id": inst.instance_id,
    }


def instance_from_dict(d: dict) -> GameInstance:
    try:
        n = int(d["n"])
        edges = [(int(u), int(v)) for u, v in d["edges"]]
        costs = d["costs"]
        cost_setting = str(d["cost_setting"])
        instance_id = str(d["instance_id"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed instance record: {exc}") from exc
    return GameInstance(Graph(n, edges), costs, cost_setting, instance_id)
