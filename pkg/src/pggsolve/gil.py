"""Graph-embedding imitation policy.

A structure2vec-style network scores vertices while an independent set is
built one vertex at a time. Each vertex carries a one-hot feature (in the
set so far, or not), K propagation rounds produce embeddings, and a
proto-action vector is read out from the pooled embedding; a vertex's score
is its embedding's Euclidean distance to the proto-action. Training imitates
search: the cross entropy between softmaxed scores and normalized root visit
counts is minimized with Adam, gradients derived by hand.

Greedy rollouts go through the compiled kernel; training stays in numpy
(dense matmuls, n is small at training sizes).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import gil_rollout, gil_scores
from .game import Graph, GameInstance, objective_code
from .rng import Stream, mix_seed
from .uct import Demonstration, demo_graph

LR_GRID = (1e-4, 1e-3, 1e-2)
K_GRID = (3, 4, 5, 6)
STRATEGIES = ("separate", "mixed", "curriculum")

PROB_FLOOR = 1e-12
MODEL_FORMAT = "pggsolve-policy-v1"


@dataclass
class PolicyParams:
    """Weights and shape of the scoring network.

    w_node maps the 2-dim one-hot features, w_agg mixes aggregated neighbor
    embeddings, w_hid/w_out read the pooled embedding out to the
    proto-action. The softmax temperature is carried as log_tau so it stays
    positive under unconstrained updates. distance_sign=-1.0 makes the
    policy prefer the vertex nearest the proto-action; +1.0 flips that.
    """

    w_node: np.ndarray
    w_agg: np.ndarray
    w_hid: np.ndarray
    w_out: np.ndarray
    log_tau: float
    K: int
    distance_sign: float = -1.0

    @property
    def embed_dim(self) -> int:
        return self.w_agg.shape[0]

    @property
    def hidden_dim(self) -> int:
        return self.w_hid.shape[1]

    @property
    def proto_dim(self) -> int:
        return self.w_out.shape[1]

    def copy(self) -> "PolicyParams":
        return PolicyParams(self.w_node.copy(), self.w_agg.copy(),
                            self.w_hid.copy(), self.w_out.copy(),
                            float(self.log_tau), self.K, self.distance_sign)


def init_params(seed: int, embed_dim: int = 64, hidden_dim: int = 64,
                proto_dim: int = 64, K: int = 3, tau: float = 10.0,
                distance_sign: float = -1.0) -> PolicyParams:
    """Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) per block, row-major fill
    from one seeded stream so parameters are reproducible."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if proto_dim != embed_dim:
        raise ValueError("proto_dim must equal embed_dim; vertex scores are "
                         "embedding-to-proto-action distances")
    if tau <= 0.0:
        raise ValueError(f"tau must be positive, got {tau}")
    stream = Stream(mix_seed(seed, 71))

    def block(rows, cols, fan_in):
        bound = 1.0 / math.sqrt(fan_in)
        w = np.empty((rows, cols), dtype=np.float64)
        for r in range(rows):
            for c in range(cols):
                w[r, c] = (stream.uniform() * 2.0 - 1.0) * bound
        return w

    return PolicyParams(
        w_node=block(2, embed_dim, 2),
        w_agg=block(embed_dim, embed_dim, embed_dim),
        w_hid=block(embed_dim, hidden_dim, embed_dim),
        w_out=block(hidden_dim, proto_dim, hidden_dim),
        log_tau=math.log(tau),
        K=K,
        distance_sign=distance_sign,
    )


# ---------------------------------------------------------------------------
# numpy forward (training/reference path)
# ---------------------------------------------------------------------------

def _base_rows(in_set: np.ndarray, w_node: np.ndarray) -> np.ndarray:
    # feature row 0 for members, row 1 for the rest
    rows = np.where(in_set, 0, 1)
    return w_node[rows]


def _forward(graph: Graph, in_set: np.ndarray, params: PolicyParams) -> dict:
    """Full forward pass keeping every intermediate needed by _backward."""
    A = graph.dense_adjacency().astype(np.float64)
    base = _base_rows(in_set, params.w_node)
    Ms = [np.maximum(base, 0.0)]
    Ns = [None]
    for _k in range(params.K - 1):
        N = A @ Ms[-1]
        Ms.append(np.maximum(base + N @ params.w_agg, 0.0))
        Ns.append(N)
    M = Ms[-1]
    mu = M.sum(axis=0)
    pre = mu @ params.w_hid
    hid = np.maximum(pre, 0.0)
    phi = hid @ params.w_out
    diff = M - phi[None, :]
    dists = np.sqrt((diff * diff).sum(axis=1))
    return {"A": A, "Ms": Ms, "Ns": Ns, "mu": mu, "hid": hid,
            "phi": phi, "dists": dists}


def policy_distances(graph: Graph, in_set, params: PolicyParams) -> np.ndarray:
    """Per-vertex distances via the numpy path (tests compare against the
    kernel, which accumulates in a different order; agreement is to
    tolerance, not bitwise)."""
    in_set = np.asarray(in_set, dtype=np.bool_)
    return _forward(graph, in_set, params)["dists"]


def kernel_distances(graph: Graph, in_set, params: PolicyParams) -> np.ndarray:
    in_set = np.asarray(in_set, dtype=np.bool_)
    n, e = graph.n, params.embed_dim
    M = np.empty((n, e), dtype=np.float64)
    M2 = np.empty((n, e), dtype=np.float64)
    return gil_scores(graph.indptr, graph.indices, in_set, params.w_node,
                      params.w_agg, params.w_hid, params.w_out, params.K,
                      M, M2)


def action_probabilities(dists: np.ndarray, valid: np.ndarray,
                         params: PolicyParams) -> np.ndarray:
    """Masked softmax of sign*d/tau over the valid actions."""
    tau = math.exp(params.log_tau)
    logits = params.distance_sign * dists[valid] / tau
    z = logits - logits.max()
    ez = np.exp(z)
    return ez / ez.sum()


def kl_loss(probs: np.ndarray, target: np.ndarray) -> float:
    """Cross entropy against the visit distribution, probabilities floored
    at 1e-12 inside the log."""
    return float(-(target * np.log(np.maximum(probs, PROB_FLOOR))).sum())


@dataclass
class _Grads:
    w_node: np.ndarray
    w_agg: np.ndarray
    w_hid: np.ndarray
    w_out: np.ndarray
    log_tau: float


def _zero_grads(params: PolicyParams) -> _Grads:
    return _Grads(np.zeros_like(params.w_node), np.zeros_like(params.w_agg),
                  np.zeros_like(params.w_hid), np.zeros_like(params.w_out),
                  0.0)


def _backward(graph: Graph, in_set: np.ndarray, valid: np.ndarray,
              target: np.ndarray, params: PolicyParams,
              grads: _Grads) -> float:
    """Accumulate d(loss)/d(params) for one demonstration into grads.
    Returns the loss. Relu gates use post-activation > 0 masks."""
    fw = _forward(graph, in_set, params)
    M = fw["Ms"][-1]
    dists = fw["dists"]
    probs = action_probabilities(dists, valid, params)
    loss = kl_loss(probs, target)

    tau = math.exp(params.log_tau)
    logits = params.distance_sign * dists[valid] / tau
    dlogits = probs - target
    grads.log_tau += float(-(dlogits * logits).sum())

    dd = np.zeros(graph.n, dtype=np.float64)
    dd[valid] = dlogits * params.distance_sign / tau

    dM = np.zeros_like(M)
    dphi = np.zeros(params.proto_dim, dtype=np.float64)
    for v in valid:
        if dists[v] <= 0.0:
            continue  # kink; zero subgradient
        unit = (M[v] - fw["phi"]) / dists[v]
        dM[v] += dd[v] * unit
        dphi -= dd[v] * unit

    hid = fw["hid"]
    grads.w_out += np.outer(hid, dphi)
    dpre = (dphi @ params.w_out.T) * (hid > 0.0)
    grads.w_hid += np.outer(fw["mu"], dpre)
    dmu = dpre @ params.w_hid.T
    dM += dmu[None, :]

    A = fw["A"]
    dbase = np.zeros_like(M)
    for k in range(params.K - 1, -1, -1):
        dZ = dM * (fw["Ms"][k] > 0.0)
        dbase += dZ
        if k > 0:
            grads.w_agg += fw["Ns"][k].T @ dZ
            dM = A @ (dZ @ params.w_agg.T)
    rows = np.where(in_set, 0, 1)
    for r in (0, 1):
        grads.w_node[r] += dbase[rows == r].sum(axis=0)
    return loss


def demo_loss_and_grads(graph: Graph, in_set, valid, target,
                        params: PolicyParams):
    """One-demo wrapper used by the finite-difference gradient check."""
    grads = _zero_grads(params)
    loss = _backward(graph, np.asarray(in_set, dtype=np.bool_),
                     np.asarray(valid, dtype=np.int64),
                     np.asarray(target, dtype=np.float64), params, grads)
    return loss, grads


def demo_loss(graph: Graph, in_set, valid, target,
              params: PolicyParams) -> float:
    in_set = np.asarray(in_set, dtype=np.bool_)
    valid = np.asarray(valid, dtype=np.int64)
    dists = _forward(graph, in_set, params)["dists"]
    probs = action_probabilities(dists, valid, params)
    return kl_loss(probs, np.asarray(target, dtype=np.float64))


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------

class _Adam:
    def __init__(self, params: PolicyParams, lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m = _zero_grads(params)
        self.v = _zero_grads(params)

    def step(self, params: PolicyParams, grads: _Grads) -> None:
        self.t += 1
        bc1 = 1.0 - self.b1 ** self.t
        bc2 = 1.0 - self.b2 ** self.t

        def upd(m, v, g):
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            return self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)

        params.w_node -= upd(self.m.w_node, self.v.w_node, grads.w_node)
        params.w_agg -= upd(self.m.w_agg, self.v.w_agg, grads.w_agg)
        params.w_hid -= upd(self.m.w_hid, self.v.w_hid, grads.w_hid)
        params.w_out -= upd(self.m.w_out, self.v.w_out, grads.w_out)
        g = grads.log_tau
        self.m.log_tau = self.b1 * self.m.log_tau + (1.0 - self.b1) * g
        self.v.log_tau = self.b2 * self.v.log_tau + (1.0 - self.b2) * g * g
        params.log_tau -= (self.lr * (self.m.log_tau / bc1)
                           / (math.sqrt(self.v.log_tau / bc2) + self.eps))


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-3
    steps: int = 2000
    batch_size: int = 5
    validate_every: int = 50
    strategy: str = "separate"
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; "
                             f"choose from {STRATEGIES}")
        if self.lr <= 0.0 or self.steps < 1 or self.batch_size < 1:
            raise ValueError("lr, steps and batch_size must be positive")
        if self.validate_every < 1:
            raise ValueError("validate_every must be >= 1")


@dataclass
class _Item:
    graph: Graph
    in_set: np.ndarray
    valid: np.ndarray
    target: np.ndarray
    n: int


def _demo_item(d: Demonstration) -> _Item:
    g = demo_graph(d)
    in_set = np.zeros(d.n, dtype=np.bool_)
    for v in d.independent_set:
        in_set[v] = True
    visits = np.asarray(d.visit_counts, dtype=np.float64)
    return _Item(g, in_set, np.asarray(d.valid_actions, dtype=np.int64),
                 visits / visits.sum(), d.n)


def curriculum_blocks(sizes, steps: int) -> list:
    """Consecutive equal step blocks, one per size ascending; the last block
    absorbs the remainder."""
    sizes = sorted(set(int(s) for s in sizes))
    L = len(sizes)
    per = steps // L
    blocks = []
    lo = 0
    for i, s in enumerate(sizes):
        hi = steps if i == L - 1 else lo + per
        blocks.append((lo, hi, s))
        lo = hi
    return blocks


@dataclass
class TrainResult:
    params: PolicyParams          # best checkpoint by validation value
    best_value: float
    best_step: int
    curve: list = field(default_factory=list)   # (step, validation value)
    final_params: PolicyParams | None = None


def validation_value(params: PolicyParams, instances, objective: str) -> float:
    """Mean greedy-rollout objective over the validation instances."""
    acc = 0.0
    for inst in instances:
        acc += greedy_rollout(inst, params, objective).value
    return acc / len(instances)


def train_policy(demos, val_instances, objective: str,
                 params: PolicyParams, config: TrainConfig) -> TrainResult:
    """Imitation training with periodic greedy-rollout validation.

    separate: all demos must share one size. mixed: one pool of everything.
    curriculum: pools switch through sizes ascending in equal step blocks.
    The returned params are the checkpoint with the best validation value
    (ties to the earliest); step 0 is validated too so an unhelpful run
    still returns its starting point.
    """
    items = [_demo_item(d) for d in demos]
    if not items:
        raise ValueError("no demonstrations to train on")
    if not val_instances:
        raise ValueError("no validation instances")
    sizes = sorted(set(it.n for it in items))
    if config.strategy == "separate" and len(sizes) != 1:
        raise ValueError(f"separate training needs a single size, got {sizes}")
    if config.strategy == "curriculum":
        blocks = curriculum_blocks(sizes, config.steps)
        pools = {s: [it for it in items if it.n == s] for s in sizes}
    else:
        blocks = [(0, config.steps, None)]
        pools = {None: items}

    stream = Stream(mix_seed(config.seed, 81))
    params = params.copy()
    opt = _Adam(params, config.lr)

    best_value = validation_value(params, val_instances, objective)
    best_step = 0
    best = params.copy()
    curve = [(0, best_value)]

    step = 0
    for lo, hi, size in blocks:
        pool = pools[size]
        order: list = []
        cursor = 0
        while step < hi:
            batch = []
            for _ in range(config.batch_size):
                if cursor >= len(order):
                    order = list(range(len(pool)))
                    stream.shuffle(order)
                    cursor = 0
                batch.append(pool[order[cursor]])
                cursor += 1
            grads = _zero_grads(params)
            for it in batch:
                _backward(it.graph, it.in_set, it.valid, it.target,
                          params, grads)
            inv = 1.0 / len(batch)
            grads.w_node *= inv
            grads.w_agg *= inv
            grads.w_hid *= inv
            grads.w_out *= inv
            grads.log_tau *= inv
            opt.step(params, grads)
            step += 1
            if step % config.validate_every == 0 or step == config.steps:
                val = validation_value(params, val_instances, objective)
                curve.append((step, val))
                if val > best_value:
                    best_value = val
                    best_step = step
                    best = params.copy()
    return TrainResult(best, best_value, best_step, curve, params)


# ---------------------------------------------------------------------------
# rollout
# ---------------------------------------------------------------------------

def greedy_rollout(inst: GameInstance, params: PolicyParams, objective: str):
    """Deterministic episode taking argmax sign*distance each move (the
    temperature cancels in the argmax). Returns a result with the terminal
    profile and objective value."""
    from .baselines import SolveResult

    g = inst.graph
    profile = np.zeros(inst.n, dtype=np.int8)
    value = gil_rollout(g.indptr, g.indices, inst.costs,
                        objective_code(objective), params.w_node,
                        params.w_agg, params.w_hid, params.w_out,
                        params.K, params.distance_sign, profile)
    return SolveResult(profile, float(value))


# ---------------------------------------------------------------------------
# model files
# ---------------------------------------------------------------------------

def _model_payload(params: PolicyParams) -> dict:
    return {
        "format": MODEL_FORMAT,
        "embed_dim": params.embed_dim,
        "hidden_dim": params.hidden_dim,
        "proto_dim": params.proto_dim,
        "K": params.K,
        "distance_sign": params.distance_sign,
        "log_tau": params.log_tau,
        "w_node": params.w_node.tolist(),
        "w_agg": params.w_agg.tolist(),
        "w_hid": params.w_hid.tolist(),
        "w_out": params.w_out.tolist(),
    }


def _payload_hash(payload: dict) -> str:
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def save_model(path, params: PolicyParams) -> str:
    """Write the policy as JSON with a content hash; returns the hash."""
    payload = _model_payload(params)
    digest = _payload_hash(payload)
    payload["content_hash"] = digest
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")
    return digest


def load_model(path) -> PolicyParams:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format") != MODEL_FORMAT:
        raise ValueError(f"unrecognized model format {payload.get('format')!r}")
    stored = payload.pop("content_hash", None)
    if stored is None or _payload_hash(payload) != stored:
        raise ValueError("model file content hash mismatch")
    e, h, p = payload["embed_dim"], payload["hidden_dim"], payload["proto_dim"]
    params = PolicyParams(
        w_node=np.asarray(payload["w_node"], dtype=np.float64),
        w_agg=np.asarray(payload["w_agg"], dtype=np.float64),
        w_hid=np.asarray(payload["w_hid"], dtype=np.float64),
        w_out=np.asarray(payload["w_out"], dtype=np.float64),
        log_tau=float(payload["log_tau"]),
        K=int(payload["K"]),
        distance_sign=float(payload["distance_sign"]),
    )
    shapes = {"w_node": (2, e), "w_agg": (e, e), "w_hid": (e, h),
              "w_out": (h, p)}
    for name, shape in shapes.items():
        got = getattr(params, name).shape
        if got != shape:
            raise ValueError(f"{name} has shape {got}, expected {shape}")
    return params
