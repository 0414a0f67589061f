"""Kernel backend selection.

Hot inner loops (tree search, rollouts, response dynamics, policy inference)
live in ``_kernels`` as njit-compatible functions over flat arrays. When numba
is importable they are compiled; setting the env var ``PGG_NO_NUMBA`` to
1/true/yes/on forces the interpreted NumPy fallback, which produces the same
results at interpreter speed. ``benchmarks/bench_kernels.py`` compares the two.
"""

import os


def _env_flag(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() in ("1", "true", "yes", "on")


NUMBA_DISABLED = _env_flag("PGG_NO_NUMBA")

try:
    from numba import njit as _njit

    NUMBA_IMPORTABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _njit = None
    NUMBA_IMPORTABLE = False

USING_NUMBA = NUMBA_IMPORTABLE and not NUMBA_DISABLED


def backend_name() -> str:
    return "numba" if USING_NUMBA else "numpy"


def jit(fn):
    """Compile ``fn`` with numba when the compiled backend is active."""
    if USING_NUMBA:
        return _njit(cache=True)(fn)
    return fn
