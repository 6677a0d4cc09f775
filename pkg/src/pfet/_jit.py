"""Optional numba acceleration.

Set ``PFET_DISABLE_NUMBA=1`` to force the pure-numpy kernels (also used
automatically when numba is not importable).
"""
import os


def _env_disabled():
    return os.environ.get("PFET_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


def _have_numba():
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


HAVE_NUMBA = _have_numba()
USE_NUMBA = HAVE_NUMBA and not _env_disabled()

if HAVE_NUMBA:
    from numba import njit
else:
    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
