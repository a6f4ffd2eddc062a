"""Optional numba acceleration for the hot kernels.

Set CURVEPROBE_NO_NUMBA=1 to force the pure-Python/numpy fallback path
(same results, useful for debugging and for the backend benchmark).
Numba failing to import degrades to the fallback silently.
"""

import os

try:
    from numba import njit as _njit
    NUMBA_AVAILABLE = True
except ImportError:
    NUMBA_AVAILABLE = False

_DISABLED = os.environ.get("CURVEPROBE_NO_NUMBA", "").strip() not in ("", "0")


def numba_enabled() -> bool:
    return NUMBA_AVAILABLE and not _DISABLED


def maybe_njit(*args, **kwargs):
    """@njit when numba is active, identity decorator otherwise."""
    def decorate(func):
        if numba_enabled():
            return _njit(*args, **kwargs)(func)
        return func
    return decorate
