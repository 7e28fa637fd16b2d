"""Numba toggle.

Set ``ABPLAB_DISABLE_NUMBA=1`` to force the pure-numpy code paths (also used
automatically when numba is not importable).
"""
import os

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and os.environ.get("ABPLAB_DISABLE_NUMBA", "0") not in ("1", "true", "yes")


def njit(fn):
    """Compile ``fn`` with numba unless the numpy path is selected."""
    if USE_NUMBA:
        return numba.njit(cache=True)(fn)
    return fn
