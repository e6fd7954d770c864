"""Backend switch for the hot kernels.

Set ``ERANGE_DISABLE_NUMBA=1`` to force the pure-numpy code path (useful for
debugging, coverage, or platforms without numba).
"""
from __future__ import annotations

import os

_disabled = os.environ.get("ERANGE_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:
    if _disabled:
        raise ImportError
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    HAVE_NUMBA = False
    _njit = None


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise the identity decorator."""
    if HAVE_NUMBA:
        return _njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]
    return lambda f: f


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"


def thread_count() -> int:
    """Worker count from ``ERANGE_THREADS`` (0 or unset means one per CPU)."""
    raw = os.environ.get("ERANGE_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return n
