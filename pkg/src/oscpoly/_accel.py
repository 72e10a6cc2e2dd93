"""Backend switch for the double-precision kernels.

Set ``OSCPOLY_NUMBA=0`` in the environment before import to force the pure
numpy implementations; otherwise numba is used when it imports cleanly.
"""
import os

_FLAG = os.environ.get("OSCPOLY_NUMBA", "1").strip().lower()

try:
    if _FLAG in ("0", "false", "no", "off"):
        raise ImportError("disabled by OSCPOLY_NUMBA")
    import numba

    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when enabled, otherwise an identity decorator."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f
