"""Dispatch to the active kernel backend (see ``_backend``)."""
from importlib import import_module

from ._backend import BACKEND, configure_threads

__all__ = [
    "BACKEND", "implementation", "sup_modulus", "tridiag_logdet",
    "tridiag_newton", "tridiag_residuals", "marching_segments", "certificate_sum",
]


def implementation(name=None):
    """Kernel module for backend ``name`` (default: the active one)."""
    name = name or BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    return import_module(f"._kernels_{name}", __package__)


_impl = implementation()
if BACKEND == "numba":
    configure_threads()

sup_modulus = _impl.sup_modulus
tridiag_logdet = _impl.tridiag_logdet
tridiag_newton = _impl.tridiag_newton
tridiag_residuals = _impl.tridiag_residuals
marching_segments = _impl.marching_segments
certificate_sum = _impl.certificate_sum
