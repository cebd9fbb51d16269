"""Numba switch.

Hot kernels are written twice: an ``@njit`` loop and a vectorized numpy
version.  ``USE_NUMBA`` picks which one the public dispatchers call.  Set
``FWCI_DISABLE_NUMBA=1`` to force the numpy path.  numba is still imported,
but since compilation is lazy no kernel is compiled unless called directly.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get("FWCI_DISABLE_NUMBA", "").strip().lower() not in (
    "1",
    "true",
    "yes",
    "on",
)


def njit(func=None, **kwargs):
    """``numba.njit(cache=True)`` or identity when numba is unavailable."""
    kwargs.setdefault("cache", True)
    kwargs.setdefault("nogil", True)

    def wrap(f):
        if not HAVE_NUMBA:
            return f
        return numba.njit(**kwargs)(f)

    if func is None:
        return wrap
    return wrap(func)


def backend():
    return "numba" if USE_NUMBA else "numpy"
