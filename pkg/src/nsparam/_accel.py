"""Optional numba acceleration.

Kernels in :mod:`nsparam._kernels` are written once in loop form and compiled
with ``numba.njit`` when numba is importable.  Setting the environment
variable ``NSPARAM_DISABLE_NUMBA=1`` (read at import time) selects the
vectorized numpy fallbacks instead.
"""

import os


def _noop_jit(*args, **kwargs):
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrap(f):
        return f

    return wrap


def _have_numba():
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


DISABLED = os.environ.get("NSPARAM_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}
HAVE_NUMBA = _have_numba()
USE_NUMBA = HAVE_NUMBA and not DISABLED

if HAVE_NUMBA:
    from numba import njit
else:
    njit = _noop_jit


def backend():
    """Return ``"numba"`` or ``"numpy"``, whichever path the kernels use."""
    return "numba" if USE_NUMBA else "numpy"
