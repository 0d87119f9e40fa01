"""Optional numba acceleration.

Set ``TRACEFEAT_NO_NUMBA=1`` to force the pure-numpy kernels even when numba
is importable. Kernels decorated with :func:`njit` run as plain Python when
numba is unavailable, so every call site must also have a numpy path.
"""
import os

_DISABLED = os.environ.get("TRACEFEAT_NO_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError
    import numba
    from numba import njit as _numba_njit, prange

    HAVE_NUMBA = True
    if "NUMBA_THREADING_LAYER" not in os.environ:
        # the bundled TBB is too old; omp is thread-safe, workqueue is not
        numba.config.THREADING_LAYER = "omp"

    def njit(*args, **kwargs):
        kwargs.setdefault("cache", True)
        kwargs.setdefault("nogil", True)
        return _numba_njit(*args, **kwargs)

except ImportError:
    numba = None
    HAVE_NUMBA = False
    prange = range

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f


BACKENDS = ("numba", "numpy")


def default_backend():
    return "numba" if HAVE_NUMBA else "numpy"


def resolve_backend(backend=None):
    """Map ``None`` to the default and reject backends that cannot run here."""
    if backend is None:
        return default_backend()
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is disabled or not installed")
    return backend


def set_threads(n):
    """Cap the numba thread pool. No-op on the numpy path."""
    if HAVE_NUMBA and n:
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
