"""Optional numba dependency.

Set ``HETREG_DISABLE_NUMBA=1`` to force the pure-numpy kernels. When numba is
not importable the numpy kernels are used regardless of the flag.
"""
import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False


def _flag(name):
    return os.environ.get(name, "").strip().lower() in ("1", "true", "yes", "on")


USE_NUMBA = HAVE_NUMBA and not _flag("HETREG_DISABLE_NUMBA")


def njit(*args, **kwargs):
    """``numba.njit(cache=True)`` when numba is installed, identity otherwise."""
    if not HAVE_NUMBA:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return numba.njit(*args, **kwargs)
