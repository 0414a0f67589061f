"""Portable seeded randomness.

All functional randomness in the package flows through splitmix64 (seed
derivation) and xoshiro256++ (streams) so that datasets, episodes and training
runs reproduce bit-for-bit across machines and across the numba/numpy kernel
backends. This module holds the interpreted implementation (masked Python
ints; numpy warns on uint64 scalar overflow, so plain ints are the safe
interpreter-side representation). ``_kernels`` carries a second, uint64-typed
source for compiled code; test_rng pins the two streams against each other.

Seed derivation is ``mix_seed(master_seed, *tags)``: tags are small ints
(model/cost/split codes, instance index, stream role) folded in order through
splitmix64. Every instance and every stochastic run names its seed this way,
which is what makes partial dataset generation and resumed experiments
reproduce the full run byte-identically.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53

# Tag namespaces used in seed derivation (stable; changing them changes data).
MODEL_TAGS = {"ER": 1, "BA": 2, "WS": 3}
COST_TAGS = {"IC": 1, "HC": 2}
SPLIT_TAGS = {"train": 1, "eval": 2, "test": 3}


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state; return (new_state, 64-bit output)."""
    state = (state + _GOLDEN) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def mix_seed(*parts: int) -> int:
    """Fold integer parts into one 64-bit seed. Order-sensitive."""
    h = 0
    for p in parts:
        _, h = splitmix64(h ^ (int(p) & MASK64))
    return h


def _init_state_ints(seed: int) -> list[int]:
    st = int(seed) & MASK64
    s = []
    for _ in range(4):
        st, out = splitmix64(st)
        s.append(out)
    if not any(s):  # xoshiro must not start all-zero
        s[0] = _GOLDEN
    return s


def stream_state(seed: int) -> np.ndarray:
    """Kernel-side stream state: uint64[4] initialized from ``seed``."""
    return np.array(_init_state_ints(seed), dtype=np.uint64)


def _rotl(x: int, k: int) -> int:
    return (((x << k) & MASK64) | (x >> (64 - k))) & MASK64


class Stream:
    """xoshiro256++ stream (interpreted). Same sequence as the kernel rng."""

    __slots__ = ("_s",)

    def __init__(self, seed: int):
        self._s = _init_state_ints(seed)

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s0 + s3) & MASK64, 23) + s0) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def uniform(self) -> float:
        """Uniform float64 in [0, 1)."""
        return (self.next_u64() >> 11) * _INV_2_53

    def below(self, n: int) -> int:
        """Uniform int in [0, n). Multiply-based; bias negligible for small n."""
        if n <= 0:
            raise ValueError(f"below() needs n >= 1, got {n}")
        return int(self.uniform() * n)

    def shuffle(self, seq) -> None:
        """In-place Fisher-Yates shuffle of a list or 1-d array."""
        for i in range(len(seq) - 1, 0, -1):
            j = self.below(i + 1)
            seq[i], seq[j] = seq[j], seq[i]

    def state_array(self) -> np.ndarray:
        """Snapshot of the current state as uint64[4] (for handing to kernels)."""
        return np.array(self._s, dtype=np.uint64)
