"""Seeded generation of game instances and dataset files.

Three graph families, each with the package's portable RNG so datasets are
byte-identical across machines and backends:

- ER: exactly round(frac * n(n-1)/2) distinct edges, uniform over pairs
  (frac defaults to 0.20; the count is exact, not per-edge Bernoulli).
- BA: M isolated seed vertices; each later vertex attaches to M distinct
  existing vertices drawn degree-proportionally without replacement, falling
  back to uniform while all candidate degrees are zero. Edge count is exactly
  (n - M) * M.
- WS: ring lattice with k/2 neighbors per side, then each lattice edge's far
  endpoint is rewired with probability p to a uniformly random new endpoint
  (no self-loops or duplicates); edge count stays n*k/2.

Costs: "IC" pins every cost to 0.5; "HC" draws uniform costs, resampling any
draw equal to 0.0 so costs stay strictly inside (0, 1).

Instance i of a (model, n, cost_setting, split) family is fully determined by
the master seed: its seed is mix_seed(master, model tag, n, cost tag, split
tag, i), with separate sub-streams for the graph and the costs. Cost setting
enters the derivation, so IC and HC families use different graphs.

Disk layout: <root>/<model>_<n>_<cost>/<split>.jsonl plus manifest.json
(master seed, family parameters, counts, per-split sha256 of the jsonl
bytes). The dataset root comes from the PGG_DATA_DIR env var when set,
otherwise from the configured path.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np

from .game import COST_HC, COST_IC, COST_SETTINGS, GameInstance, Graph, instance_from_dict, instance_to_dict
from .rng import COST_TAGS, MODEL_TAGS, SPLIT_TAGS, Stream, mix_seed

MODELS = ("ER", "BA", "WS")
SPLITS = ("train", "eval", "test")

DEFAULT_DATA_ROOT = "pgg-data"
DATA_DIR_ENV = "PGG_DATA_DIR"


@dataclass(frozen=True)
class FamilyConfig:
    """One dataset family: a graph model at a size under a cost setting."""

    model: str
    n: int
    cost_setting: str
    er_edge_fraction: float = 0.2
    ba_attach: int = 2
    ws_ring_neighbors: int = 2
    ws_rewire_prob: float = 0.1

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.cost_setting not in COST_SETTINGS:
            raise ValueError(f"unknown cost setting {self.cost_setting!r}")
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.model == "ER" and not (0.0 < self.er_edge_fraction <= 1.0):
            raise ValueError("er_edge_fraction must be in (0, 1]")
        if self.model == "BA" and not (1 <= self.ba_attach < self.n):
            raise ValueError(f"ba_attach must be in [1, n), got {self.ba_attach}")
        if self.model == "WS":
            k = self.ws_ring_neighbors
            if k < 2 or k % 2 != 0 or k >= self.n:
                raise ValueError(f"ws_ring_neighbors must be even, >= 2 and < n, got {k}")
            if not (0.0 <= self.ws_rewire_prob <= 1.0):
                raise ValueError("ws_rewire_prob must be in [0, 1]")

    def dir_name(self) -> str:
        return f"{self.model}_{self.n}_{self.cost_setting}"

    def params_dict(self) -> dict:
        if self.model == "ER":
            return {"er_edge_fraction": self.er_edge_fraction}
        if self.model == "BA":
            return {"ba_attach": self.ba_attach}
        return {"ws_ring_neighbors": self.ws_ring_neighbors,
                "ws_rewire_prob": self.ws_rewire_prob}


def er_edge_count(n: int, frac: float) -> int:
    """round-half-up of frac * n(n-1)/2 (exact for the standard sizes)."""
    return int(frac * (n * (n - 1) // 2) + 0.5)


def sample_er_edges(n: int, m: int, stream: Stream) -> list[tuple[int, int]]:
    """m distinct edges uniform over all pairs, by Floyd's sampling."""
    total = n * (n - 1) // 2
    if m > total:
        raise ValueError(f"cannot place {m} edges among {total} pairs")
    chosen: set[int] = set()
    for j in range(total - m, total):
        t = stream.below(j + 1)
        chosen.add(j if t in chosen else t)
    # pair index k -> (u, v): rows ordered by u, then v ascending
    rowstart = np.empty(n, dtype=np.int64)
    acc = 0
    for u in range(n):
        rowstart[u] = acc
        acc += n - 1 - u
    edges = []
    for k in sorted(chosen):
        u = int(np.searchsorted(rowstart, k, side="right")) - 1
        v = u + 1 + (k - int(rowstart[u]))
        edges.append((u, v))
    return edges


def sample_ba_edges(n: int, attach: int, stream: Stream) -> list[tuple[int, int]]:
    """Preferential attachment with M=attach isolated seed vertices."""
    deg = [0] * n
    edges = []
    for v in range(attach, n):
        cand = list(range(v))
        weights = [deg[u] for u in cand]
        targets = []
        for _ in range(attach):
            tot = sum(weights)
            if tot == 0:
                idx = stream.below(len(cand))
            else:
                r = stream.uniform() * tot
                acc = 0.0
                idx = len(cand) - 1
                for i, w in enumerate(weights):
                    acc += w
                    if r < acc:
                        idx = i
                        break
            targets.append(cand.pop(idx))
            weights.pop(idx)
        for t in targets:
            edges.append((t, v) if t < v else (v, t))
            deg[t] += 1
            deg[v] += 1
    return sorted(edges)


def sample_ws_edges(n: int, k: int, p: float, stream: Stream) -> list[tuple[int, int]]:
    """Ring lattice with per-edge far-endpoint rewiring; count stays n*k/2."""

    def canon(a: int, b: int) -> tuple[int, int]:
        return (a, b) if a < b else (b, a)

    edge_set: set[tuple[int, int]] = set()
    deg = [0] * n
    for j in range(1, k // 2 + 1):
        for i in range(n):
            e = canon(i, (i + j) % n)
            if e not in edge_set:
                edge_set.add(e)
                deg[e[0]] += 1
                deg[e[1]] += 1
    for j in range(1, k // 2 + 1):
        for i in range(n):
            old = canon(i, (i + j) % n)
            if old not in edge_set:
                continue  # already rewired away by an earlier coincidence
            if stream.uniform() >= p:
                continue
            if deg[i] >= n - 1:
                continue  # saturated vertex, no legal new endpoint
            while True:
                w = stream.below(n)
                if w != i and canon(i, w) not in edge_set:
                    break
            edge_set.remove(old)
            deg[old[0]] -= 1
            deg[old[1]] -= 1
            new = canon(i, w)
            edge_set.add(new)
            deg[new[0]] += 1
            deg[new[1]] += 1
    return sorted(edge_set)


def sample_costs(cost_setting: str, n: int, stream: Stream) -> np.ndarray:
    if cost_setting == COST_IC:
        return np.full(n, 0.5, dtype=np.float64)
    if cost_setting == COST_HC:
        out = np.empty(n, dtype=np.float64)
        for i in range(n):
            u = stream.uniform()
            while u == 0.0:  # keep costs strictly inside (0, 1)
                u = stream.uniform()
            out[i] = u
        return out
    raise ValueError(f"unknown cost setting {cost_setting!r}")


def sample_graph(cfg: FamilyConfig, stream: Stream) -> Graph:
    if cfg.model == "ER":
        m = er_edge_count(cfg.n, cfg.er_edge_fraction)
        return Graph(cfg.n, sample_er_edges(cfg.n, m, stream))
    if cfg.model == "BA":
        return Graph(cfg.n, sample_ba_edges(cfg.n, cfg.ba_attach, stream))
    return Graph(cfg.n, sample_ws_edges(cfg.n, cfg.ws_ring_neighbors,
                                        cfg.ws_rewire_prob, stream))


def make_instance(cfg: FamilyConfig, split: str, index: int, master_seed: int) -> GameInstance:
    """Instance (cfg, split, index) under master_seed; independent of counts."""
    if split not in SPLITS:
        raise ValueError(f"unknown split {split!r}; expected one of {SPLITS}")
    iseed = mix_seed(master_seed, MODEL_TAGS[cfg.model], cfg.n,
                     COST_TAGS[cfg.cost_setting], SPLIT_TAGS[split], index)
    graph = sample_graph(cfg, Stream(mix_seed(iseed, 1)))
    costs = sample_costs(cfg.cost_setting, cfg.n, Stream(mix_seed(iseed, 2)))
    iid = f"{cfg.model}_{cfg.n}_{cfg.cost_setting}_{split}_{index:04d}"
    return GameInstance(graph, costs, cfg.cost_setting, iid)


# ---------------------------------------------------------------------------
# dataset files
# ---------------------------------------------------------------------------

def resolve_data_root(configured: str | None = None) -> str:
    """PGG_DATA_DIR wins over the configured path, which wins over default."""
    env = os.environ.get(DATA_DIR_ENV, "").strip()
    if env:
        return env
    return configured if configured else DEFAULT_DATA_ROOT


def _instance_line(inst: GameInstance) -> str:
    return json.dumps(instance_to_dict(inst), sort_keys=True, separators=(",", ":"))


def write_dataset(root: str, cfg: FamilyConfig, counts: dict[str, int],
                  master_seed: int) -> str:
    """Generate and write the family's splits; returns the family directory."""
    fam_dir = os.path.join(root, cfg.dir_name())
    os.makedirs(fam_dir, exist_ok=True)
    hashes = {}
    for split, count in sorted(counts.items()):
        if count < 0:
            raise ValueError(f"negative count for split {split!r}")
        lines = []
        for i in range(count):
            lines.append(_instance_line(make_instance(cfg, split, i, master_seed)))
        blob = ("\n".join(lines) + "\n") if lines else ""
        path = os.path.join(fam_dir, f"{split}.jsonl")
        with open(path, "w") as fh:
            fh.write(blob)
        hashes[split] = hashlib.sha256(blob.encode()).hexdigest()
    manifest = {
        "master_seed": int(master_seed),
        "model": cfg.model,
        "n": cfg.n,
        "cost_setting": cfg.cost_setting,
        "params": cfg.params_dict(),
        "counts": {k: int(v) for k, v in sorted(counts.items())},
        "content_hashes": hashes,
    }
    with open(os.path.join(fam_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return fam_dir


def read_manifest(root: str, cfg: FamilyConfig) -> dict | None:
    path = os.path.join(root, cfg.dir_name(), "manifest.json")
    if not os.path.exists(path):
        return None
    with open(path) as fh:
        return json.load(fh)


def ensure_dataset(root: str, cfg: FamilyConfig, counts: dict[str, int],
                   master_seed: int) -> str:
    """Write the dataset unless a matching one (same seed/params, counts at
    least as large) is already on disk."""
    man = read_manifest(root, cfg)
    if man is not None:
        same = (man.get("master_seed") == int(master_seed)
                and man.get("params") == cfg.params_dict()
                and all(man.get("counts", {}).get(s, 0) >= c for s, c in counts.items()))
        if same:
            return os.path.join(root, cfg.dir_name())
        merged = dict(man.get("counts", {}))
        for s, c in counts.items():
            merged[s] = max(merged.get(s, 0), c)
        if man.get("master_seed") == int(master_seed) and man.get("params") == cfg.params_dict():
            return write_dataset(root, cfg, merged, master_seed)
    return write_dataset(root, cfg, dict(counts), master_seed)


def load_split(root: str, cfg: FamilyConfig, split: str,
               count: int | None = None) -> list[GameInstance]:
    path = os.path.join(root, cfg.dir_name(), f"{split}.jsonl")
    if not os.path.exists(path):
        raise FileNotFoundError(f"no dataset split at {path}; generate it first")
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(instance_from_dict(json.loads(line)))
            if count is not None and len(out) >= count:
                break
    if count is not None and len(out) < count:
        raise ValueError(f"{path} holds {len(out)} instances, need {count}")
    return out
