"""JIT switch.

Kernels in :mod:`simon.kernels` come in two flavours: a numba ``@njit`` loop
and a vectorised numpy fallback.  The jitted path is used when numba imports
and ``SIMON_DISABLE_JIT`` is unset (or ``0``/``false``).
"""
import os

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False


def _env_disabled():
    return os.environ.get("SIMON_DISABLE_JIT", "0").strip().lower() not in ("", "0", "false", "no")


USE_JIT = HAS_NUMBA and not _env_disabled()


def njit(*args, **kws):
    """``numba.njit`` with caching on; identity decorator if numba is missing."""
    if not HAS_NUMBA:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    kws.setdefault("cache", True)
    kws.setdefault("nogil", True)
    return numba.njit(*args, **kws)
