"""Optional numba acceleration.

Set ``STABLE_ALLOC_NUMBA=0`` to force the pure numpy/python kernels.  The
flag is read once at import time.
"""
import os

USE_NUMBA = os.environ.get("STABLE_ALLOC_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")

try:
    import numba  # type: ignore
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    USE_NUMBA = False


def njit(function):
    """Compile ``function`` with numba when available, else return ``None``."""
    if not USE_NUMBA:
        return None
    return numba.njit(cache=True, nogil=True)(function)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
