"""Kernel backend selection.

Hot loops are compiled with numba when it is importable.  Setting the
environment variable ``VEXLAP_NO_NUMBA=1`` before import forces the pure
numpy implementations, which are always available and are what the
benchmark compares against.
"""
import os

_DISABLED = os.environ.get("VEXLAP_NO_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError("numba disabled by VEXLAP_NO_NUMBA")
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False
    _njit = None


def njit(func):
    """Compile ``func`` with numba if available, else return it unchanged."""
    if not HAVE_NUMBA:
        return func
    return _njit(cache=True, nogil=True)(func)


BACKEND = "numba" if HAVE_NUMBA else "numpy"
