"""Switch between numba-compiled kernels and the pure-numpy fallback.

Set ``POLYVEM_NUMBA=0`` in the environment before importing :mod:`polyvem`
to force the numpy path. When numba is not installed the numpy path is used
regardless of the flag.
"""
import os

try:
    import numba as _nb
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _nb = None
    HAVE_NUMBA = False


def _flag_enabled():
    value = os.environ.get("POLYVEM_NUMBA", "1").strip().lower()
    return value not in ("0", "false", "no", "off")


USE_NUMBA = HAVE_NUMBA and _flag_enabled()


def njit(func):
    """``numba.njit`` with the package defaults, or identity without numba."""
    if not HAVE_NUMBA:
        return func
    return _nb.njit(cache=True, nogil=True)(func)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
