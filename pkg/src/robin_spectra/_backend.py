"""Kernel backend selection.

Hot loops live in two interchangeable modules: ``_kernels_numba`` (``@njit``)
and ``_kernels_numpy`` (vectorised numpy).  ``ROBIN_SPECTRA_BACKEND=numpy``
forces the fallback; otherwise numba is used when importable.
``ROBIN_SPECTRA_THREADS`` caps the numba thread pool used by the parallel
grid sweep.
"""
import os

BACKEND_ENV = "ROBIN_SPECTRA_BACKEND"
THREADS_ENV = "ROBIN_SPECTRA_THREADS"


def _numba_available():
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def select_backend(requested=None):
    requested = (requested or os.environ.get(BACKEND_ENV) or "numba").strip().lower()
    if requested not in ("numba", "numpy"):
        raise ValueError(f"{BACKEND_ENV} must be 'numba' or 'numpy', got {requested!r}")
    if requested == "numba" and not _numba_available():
        return "numpy"
    return requested


def configure_threads():
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return None
    n = int(raw)
    if n < 1:
        raise ValueError(f"{THREADS_ENV} must be a positive integer")
    import numba

    n = min(n, numba.config.NUMBA_NUM_THREADS)
    numba.set_num_threads(n)
    return n


BACKEND = select_backend()
