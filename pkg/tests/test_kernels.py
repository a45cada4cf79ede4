import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from robin_spectra import kernels
from robin_spectra._backend import select_backend
from robin_spectra.enclosure import GridField, PolarGrid
from robin_spectra.lattice import Potential, build_truncation

NB = kernels.implementation("numba")
NP = kernels.implementation("numpy")


def close(x, y, rtol=1e-10):
    x, y = np.asarray(x), np.asarray(y)
    scale = max(1.0, float(np.max(np.abs(x))) if x.size else 1.0)
    return x.shape == y.shape and np.allclose(x, y, rtol=rtol, atol=1e-12 * scale)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.implementation("fortran")
    with pytest.raises(ValueError):
        select_backend("cuda")


def test_env_selects_backend():
    code = "from robin_spectra import kernels; print(kernels.BACKEND, kernels.sup_modulus.__module__)"
    for name in ("numpy", "numba"):
        env = dict(os.environ, ROBIN_SPECTRA_BACKEND=name)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        backend, module = out.stdout.split()
        assert backend == name and module.endswith(f"_kernels_{name}")


def test_sup_modulus(rng):
    k = np.sqrt(rng.uniform(0, 0.99, 3000)) * np.exp(2j * np.pi * rng.uniform(size=3000))
    kappa = (k - 0.5) / (1 - 0.5 * k)
    assert close(NB.sup_modulus(k, kappa, 1e-14, 10**6), NP.sup_modulus(k, kappa, 1e-14, 10**6))


@given(st.floats(-2.5, 2.5), st.floats(-2.5, 2.5), st.integers(2, 30))
def test_tridiag_kernels_agree(ar, ai, N):
    M = build_truncation(complex(ar, ai), Potential.from_entries({1: 0.5j, 3: -0.2}), N)
    zs = np.array([2.7 + 0.1j, -0.3 + 1.5j, 3j, 0.1 - 2.2j])
    assert close(NB.tridiag_logdet(M.diagonal, 1 + 0j, zs), NP.tridiag_logdet(M.diagonal, 1 + 0j, zs))
    # Newton paths can split on rounding, so check each converged end point is an eigenvalue
    ev = np.linalg.eigvals(M.to_dense())
    for impl in (NB, NP):
        z, steps = impl.tridiag_newton(M.diagonal, 1 + 0j, zs, 1e-13, 200)
        for zj, sj in zip(z, steps):
            if np.isfinite(zj) and sj < 1e-10:
                assert np.min(np.abs(ev - zj)) < 1e-6 * max(1, abs(zj))


def test_tridiag_residuals():
    M = build_truncation(0.3, Potential.from_dense([0.2, -0.1, 0.05]), 300)
    lams = np.linspace(-1.9, 1.9, 25) + 0.01j
    assert close(NB.tridiag_residuals(M.diagonal, 1.0, lams, 3), NP.tridiag_residuals(M.diagonal, 1.0, lams, 3),
                 rtol=1e-6)


def test_residual_at_exact_eigenvalue():
    # the shift equals an eigenvalue exactly: a zero pivot must not raise
    M = build_truncation(0.0, Potential.point(1, 1.0), 2)
    lam = np.array([M.diagonal[0]])
    for impl in (NB, NP):
        assert np.all(np.isfinite(impl.tridiag_residuals(M.diagonal, 1.0, lam, 2)))


def _segments(out):
    segs = np.asarray(out[0]) if isinstance(out, tuple) else np.asarray(out)
    return segs


def test_marching_segments():
    f = GridField.compute(0.0, PolarGrid.square(200)).indicator(1.0)
    a, b = NB.marching_segments(f), NP.marching_segments(f)
    if isinstance(a, tuple):
        for x, y in zip(a, b):
            assert close(x, y)
    else:
        assert close(a, b)


@pytest.mark.parametrize("q", [0.1, 0.5])
def test_certificate_sum(q):
    assert NB.certificate_sum(11, 200_000, q) == pytest.approx(NP.certificate_sum(11, 200_000, q), rel=1e-12)
