"""Backend selection for the hot numerical kernels.

Kernels are written once in plain Python/numpy and compiled with numba when it
is importable and not disabled.  Set ``LANDAULAB_BACKEND=numpy`` to force the
pure-numpy path (useful for debugging and for the benchmark comparison).
"""

import os

BACKEND_ENV = "LANDAULAB_BACKEND"

_requested = os.environ.get(BACKEND_ENV, "numba").strip().lower()

try:
    import numba  # noqa: F401

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA and _requested != "numpy"


def backend():
    """Name of the active kernel backend, ``"numba"`` or ``"numpy"``."""
    return "numba" if USE_NUMBA else "numpy"


def maybe_njit(func):
    """Compile ``func`` with ``numba.njit(cache=True)`` when the numba backend is active."""
    if USE_NUMBA:
        import numba

        return numba.njit(cache=True)(func)
    return func
