"""Eigenvalues of finite sections, exact rank-one eigenvalues and Birman-Schwinger norms."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.linalg import eigvalsh_tridiagonal

from . import kernels
from .errors import ContourTooClose, ConvergenceFailure, NumericalError, SizeError
from .hardy import power_weight
from .lattice import Potential, RobinCoupling, TridiagonalMatrix, build_truncation, inverse_joukowski
from .resolvent import _check_k, green_evaluator

MAX_DENSE = 4000
RESIDUAL_ITERS = 3
ROOT_FILTER = 1e-10


@dataclass(frozen=True, eq=False)
class EigenReport:
    N: int
    eigenvalues: np.ndarray
    residual: float

    def to_json_obj(self) -> dict:
        return {"N": self.N,
                "eigenvalues": [{"re": float(z.real), "im": float(z.imag)} for z in self.eigenvalues],
                "residual": float(self.residual)}

    def outside(self, margin: float) -> np.ndarray:
        return self.eigenvalues[band_distance(self.eigenvalues) > margin]


def band_distance(z) -> np.ndarray:
    """Distance from ``z`` to the segment ``[-2, 2]``."""
    z = np.asarray(z, dtype=complex)
    return np.abs(z - np.clip(z.real, -2.0, 2.0))


def _sorted(ev: np.ndarray) -> np.ndarray:
    ev = np.asarray(ev, dtype=complex)
    return ev[np.lexsort((ev.imag, ev.real))]


def eigenvalues_dense(M: TridiagonalMatrix, residuals: bool = True) -> EigenReport:
    """All eigenvalues of a section, sorted by ``(Re, Im)``.

    Non-Hermitian sections go through LAPACK ``geev`` (balancing, Hessenberg
    reduction, shifted QR); Hermitian ones through the tridiagonal solver.
    The residual is the worst ``||(M - lam) v||`` after inverse iteration.
    """
    N = M.N
    if N > MAX_DENSE:
        raise SizeError(f"dense eigensolver is limited to N <= {MAX_DENSE}")
    try:
        if M.is_real_symmetric():
            ev = eigvalsh_tridiagonal(M.diagonal.real, np.full(N - 1, float(M.offdiag))).astype(complex)
        else:
            ev = scipy.linalg.eigvals(M.to_dense(), overwrite_a=True, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(f"eigenvalue iteration failed: {exc}") from exc
    ev = _sorted(ev)
    res = 0.0
    if residuals:
        res = float(np.max(kernels.tridiag_residuals(M.diagonal, M.offdiag, ev, RESIDUAL_ITERS)))
    return EigenReport(N, ev, res)


# -- argument principle ----------------------------------------------------------------

def _stadium(margin: float):
    """Arclength parametrisation of the curve at distance ``margin`` from ``[-2, 2]``."""
    seg = 4.0
    arc = math.pi * margin
    total = 2 * seg + 2 * arc

    def z_of(t):
        t = np.mod(np.asarray(t, dtype=float), total)
        out = np.empty(t.shape, dtype=complex)
        s1 = t < seg                                    # bottom, left to right
        s2 = (t >= seg) & (t < seg + arc)               # right cap
        s3 = (t >= seg + arc) & (t < 2 * seg + arc)     # top, right to left
        s4 = t >= 2 * seg + arc                         # left cap
        out[s1] = -2.0 + t[s1] - 1j * margin
        phi = -0.5 * math.pi + (t[s2] - seg) / margin
        out[s2] = 2.0 + margin * np.exp(1j * phi)
        out[s3] = 2.0 - (t[s3] - seg - arc) + 1j * margin
        phi = 0.5 * math.pi + (t[s4] - 2 * seg - arc) / margin
        out[s4] = -2.0 + margin * np.exp(1j * phi)
        return out
    return z_of, total


def _winding(diag, offsq, z_of, total, n_init=2048, max_rounds=40):
    N = diag.shape[0]
    t = np.linspace(0.0, total, n_init + 1)
    z = z_of(t)
    logd, dlog = kernels.tridiag_logdet(diag, offsq, z)
    for _ in range(max_rounds):
        if np.any(N / np.abs(dlog) < 1e-6) or not np.all(np.isfinite(dlog)):
            raise ContourTooClose("an eigenvalue lies within 1e-6 of the counting contour")
        darg = np.angle(np.exp(1j * (logd[1:].imag - logd[:-1].imag)))
        est = (0.5 * (dlog[1:] + dlog[:-1]) * (z[1:] - z[:-1])).imag
        bad = (np.abs(darg) > math.pi / 4) | (np.abs(darg - est) > math.pi / 8)
        if not bad.any():
            w = darg.sum() / (2 * math.pi)
            if abs(w - round(w)) > 0.1:
                raise NumericalError(f"winding number {w:.3f} is not near an integer")
            return int(round(w))
        idx = np.flatnonzero(bad)
        if np.min(t[idx + 1] - t[idx]) < 1e-13 * total:
            raise ContourTooClose("argument-principle refinement stalled")
        tm = 0.5 * (t[idx] + t[idx + 1])
        zm = z_of(tm)
        lm, dm = kernels.tridiag_logdet(diag, offsq, zm)
        t = np.insert(t, idx + 1, tm)
        z = np.insert(z, idx + 1, zm)
        logd = np.insert(logd, idx + 1, lm)
        dlog = np.insert(dlog, idx + 1, dm)
    raise ConvergenceFailure("argument-principle refinement did not converge")


def count_outside_band(M: TridiagonalMatrix, band_margin: float) -> int:
    """Eigenvalues farther than ``band_margin`` from ``[-2, 2]``, by the argument principle.

    Winds ``det(M - z)`` around the stadium at distance ``band_margin``; the
    count is ``N`` minus the number enclosed.
    """
    if band_margin <= 0:
        raise ValueError("band margin must be positive")
    z_of, total = _stadium(band_margin)
    inside = _winding(M.diagonal, complex(M.offdiag) ** 2, z_of, total)
    return M.N - inside


def refine_in_truncation(M: TridiagonalMatrix, z0, tol: float = 1e-14, max_iter: int = 100):
    """Newton on ``det(M - z)`` from each starting point; returns ``(z, last_step)``."""
    z, steps = kernels.tridiag_newton(M.diagonal, complex(M.offdiag) ** 2, np.atleast_1d(z0), tol, max_iter)
    return z, steps


# -- rank-one perturbations ------------------------------------------------------------------

def characteristic_polynomial(a: complex, omega: complex, n: int) -> np.ndarray:
    """Ascending coefficients of ``(1 - a k)(k^2 - 1) + omega [k (1 - a k) - (k - a) k^{2n}]``.

    Its roots ``k`` in the punctured unit disk give the eigenvalues
    ``k + 1/k`` of ``J_a + omega P_n`` (the equation ``1 + omega G_{n,n} = 0``
    with denominators cleared).  ``k = +-1`` are always roots and are spurious.
    """
    c = np.zeros(2 * n + 2, dtype=complex)
    c[0] += -1.0
    c[1] += a
    c[2] += 1.0
    c[3] += -a
    c[1] += omega
    c[2] += -omega * a
    c[2 * n + 1] += -omega
    c[2 * n] += omega * a
    return c


def rank_one_eigenvalues_exact(a, omega, n: int) -> list:
    """All eigenvalues of ``J_a + omega P_n`` off ``[-2, 2]``, from the characteristic polynomial."""
    a = RobinCoupling.coerce(a).a
    omega = complex(omega)
    if n < 1:
        raise ValueError("site must be >= 1")
    if omega == 0:
        return [a + 1.0 / a] if abs(a) > 1 else []
    P = np.polynomial.Polynomial(characteristic_polynomial(a, omega, n))
    dP = P.deriv()
    roots = P.roots()
    out = []
    for k in roots:
        for _ in range(3):
            d = dP(k)
            if d == 0:
                break
            k = k - P(k) / d
        if abs(k) < ROOT_FILTER or abs(k) >= 1.0 - ROOT_FILTER:
            continue
        if a != 0 and abs(k - 1.0 / a) < ROOT_FILTER:
            continue
        z = k + 1.0 / k
        if not any(abs(z - w) <= 1e-9 * max(1.0, abs(z)) for w in out):
            out.append(z)
    return [complex(z) for z in _sorted(np.array(out, dtype=complex))] if out else []


def verify_in_truncation(a, V: Potential, zs, N: int) -> np.ndarray:
    """Distance from each ``z`` to the Newton-refined eigenvalue of the ``N``-section nearby."""
    M = build_truncation(a, V, N)
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    if zs.size == 0:
        return np.zeros(0)
    zr, _ = refine_in_truncation(M, zs)
    return np.abs(zr - zs)


def stable_under_doubling(a, V: Potential, N: int, margin: float, tol: float = 1e-6):
    """Eigenvalues of the ``N``-section outside the ``margin`` neighbourhood that persist at ``2N``.

    A candidate is kept when Newton on the ``2N``-section started from it
    moves by less than ``tol``.
    """
    rep = eigenvalues_dense(build_truncation(a, V, N), residuals=False)
    cand = rep.outside(margin)
    if cand.size == 0:
        return cand
    moved = verify_in_truncation(a, V, cand, 2 * N)
    return cand[moved < tol]


# -- Birman-Schwinger ----------------------------------------------------------------------

def birman_schwinger_matrix(z, a, V: Potential, N: int) -> np.ndarray:
    """``K(z)_{m,n} = sqrt|v_m| G_{m,n}(z) sqrt|v_n| sgn(v_n)`` over the support sites ``<= N``."""
    p = inverse_joukowski(z)
    ev = green_evaluator(a)
    _check_k(p.k, ev.a)
    sec = V.section(N)
    keep = sec.values != 0
    s = sec.sites[keep]
    v = sec.values[keep]
    x = np.sqrt(np.abs(v))
    G = ev.stable_entry(p.k, s[:, None], s[None, :])
    return x[:, None] * G * (x * np.exp(1j * np.angle(v)))[None, :]


def bs_norm(z, a, V: Potential, N: int) -> float:
    """Largest singular value of the ``N``-section of ``K(z)``."""
    K = birman_schwinger_matrix(z, a, V, N)
    if K.size == 0:
        return 0.0
    return float(np.linalg.norm(K, 2))


# -- the critical operator --------------------------------------------------------------------

def critical_operator_spectrum(N: int) -> EigenReport:
    """Eigenvalues of the ``N``-section of ``J_0 - W``, ``W`` the optimal Hardy weight."""
    if N < 1:
        raise SizeError("N must be >= 1")
    d = -power_weight(0.5, np.arange(1, N + 1))
    if N == 1:
        return EigenReport(1, d.astype(complex), 0.0)
    ev = eigvalsh_tridiagonal(d, np.ones(N - 1))
    res = float(np.max(kernels.tridiag_residuals(d.astype(complex), 1.0, ev.astype(complex), RESIDUAL_ITERS)))
    return EigenReport(N, ev.astype(complex), res)


def orthopoly_diagonal(n_max: int) -> np.ndarray:
    """Recurrence coefficients ``b_0 = sqrt 2``, ``b_n = sqrt(1 - 1/n) + sqrt(1 + 1/n)`` (``n >= 1``)."""
    n = np.arange(1, n_max, dtype=float)
    return np.concatenate([[math.sqrt(2.0)], np.sqrt(1.0 - 1.0 / n) + np.sqrt(1.0 + 1.0 / n)])


def orthopoly_eval(x, n_max: int) -> np.ndarray:
    """``p_0(x), ..., p_{n_max}(x)`` from ``p_{n+1} = (x - b_n) p_n - p_{n-1}``, ``p_1 = x - sqrt 2``."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    x = np.asarray(x, dtype=float)
    b = orthopoly_diagonal(n_max)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = 1.0
    out[1] = x - b[0]
    for n in range(1, n_max):
        out[n + 1] = (x - b[n]) * out[n] - out[n - 1]
    return out


def orthopoly_zeros(n: int) -> np.ndarray:
    """Zeros of ``p_n``: eigenvalues of the ``n x n`` Jacobi matrix of the recurrence."""
    b = orthopoly_diagonal(n)
    if n == 1:
        return b[:1].copy()
    return eigvalsh_tridiagonal(b, np.ones(n - 1))
