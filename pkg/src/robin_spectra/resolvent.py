"""Resolvent of ``J_a``: Green kernel, the enclosure function ``g_a`` and related bounds."""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import minimize_scalar

from . import kernels
from .errors import DomainError, NumericalError, ParamError, PoleError
from .lattice import RobinCoupling, SpectralPoint, build_truncation

TAIL_CUTOFF = 1e-14
DISK_MARGIN = 1e-9
MAX_TERMS = 50_000_000


def _kappa(k, a):
    """``(k - a) / (1 - a k)``; ``inf`` where the denominator vanishes."""
    k = np.asarray(k, dtype=complex)
    den = 1.0 - a * k
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (k - a) / den
    return np.where(den == 0, complex(np.inf, 0.0), out)


def literal_kernel(a: complex, k: complex, m, n):
    """The transcribed closed form, without any sign correction."""
    m = np.asarray(m)
    n = np.asarray(n)
    num = (k - a) * k ** (m + n - 1) - (1.0 / k - a) * k ** (np.abs(n - m) + 1)
    return num / ((1.0 - a * k) * (k - 1.0 / k))


def _at_pole(k: complex, a: complex) -> bool:
    """``1 - a k = 0`` up to rounding in the preimage ``k``."""
    return abs(1.0 - a * k) <= 4.0 * np.finfo(float).eps * max(1.0, abs(a * k))


def _check_k(k: complex, a: complex):
    if k == 0:
        raise DomainError("k = 0 corresponds to z = infinity")
    if abs(k) >= 1.0:
        raise DomainError(f"Green kernel requires |k| < 1, got |k| = {abs(k)!r}")
    if _at_pole(k, a):
        raise PoleError(f"z = a + 1/a = {a + 1.0 / a!r} is the eigenvalue of J_a")


class GreenKernelEvaluator:
    """Entries of ``(J_a - z)^{-1}``.

    The sign of the closed form is fixed once at construction by solving
    ``(J_a - z) u = e_1`` on a finite section and comparing with the literal
    formula; ``sign_convention`` is the factor that makes the two agree.
    """

    ORACLE_N = 400

    def __init__(self, a):
        self.coupling = RobinCoupling.coerce(a)
        self.a = self.coupling.a
        self.sign_convention = self._calibrate()

    def _calibrate(self) -> int:
        a = self.a
        # A probe point with |k| = 0.4 that stays clear of the pole k = 1/a.
        for k in (0.4j, -0.4j, 0.4, -0.4):
            if abs(1.0 - a * k) > 0.1:
                break
        z = k + 1.0 / k
        M = build_truncation(a, None, self.ORACLE_N)
        rhs = np.zeros(self.ORACLE_N, dtype=complex)
        rhs[0] = 1.0
        col = solve_banded((1, 1), M.shifted(-z).to_banded(), rhs)
        lit = literal_kernel(a, k, 1, np.arange(1, 6))
        for s in (1, -1):
            if np.allclose(s * lit, col[:5], rtol=1e-9, atol=1e-12):
                return s
        raise NumericalError("Green kernel closed form does not match the resolvent oracle")

    def __call__(self, p, m, n):
        return self.entry(p, m, n)

    def entry(self, p, m, n):
        """``G_{m,n}(z)``; ``m`` and ``n`` may be broadcastable integer arrays."""
        k = SpectralPoint.coerce(p).k
        _check_k(k, self.a)
        m = np.asarray(m, dtype=np.int64)
        n = np.asarray(n, dtype=np.int64)
        if np.any(m < 1) or np.any(n < 1):
            raise ParamError("sites are 1-based")
        out = self.sign_convention * literal_kernel(self.a, k, m, n)
        return complex(out) if out.ndim == 0 else out

    def stable_entry(self, k: complex, m, n):
        """Same as :meth:`entry` in the factored form ``k^{|n-m|} t_{min(m,n)} / (k - 1/k)``.

        ``t_j = 1 - kappa k^{2j-1}``.  No cancellation for large sites; ``k``
        is not validated here.
        """
        m = np.asarray(m)
        n = np.asarray(n)
        kap = _kappa(k, self.a)
        lo = np.minimum(m, n)
        t = 1.0 - kap * k ** (2 * lo - 1)
        return k ** np.abs(n - m) * t / (k - 1.0 / k)

    def diagonal(self, p, n):
        k = SpectralPoint.coerce(p).k
        _check_k(k, self.a)
        return self.stable_entry(k, n, n)


@functools.lru_cache(maxsize=64)
def _evaluator(a: complex) -> GreenKernelEvaluator:
    return GreenKernelEvaluator(a)


def green_evaluator(a) -> GreenKernelEvaluator:
    return _evaluator(RobinCoupling.coerce(a).a)


def green_entry(a, p, m: int, n: int) -> complex:
    """``(J_a - z)^{-1}_{m,n}`` at the spectral point ``p`` (a :class:`SpectralPoint` or ``z``)."""
    return green_evaluator(a).entry(p, m, n)


def _max_terms(k_abs, kappa_abs):
    with np.errstate(divide="ignore", invalid="ignore"):
        n = (np.log(TAIL_CUTOFF) - np.log(kappa_abs)) / (2.0 * np.log(k_abs)) + 2.0
    n = np.where(np.isfinite(n), n, 2.0)
    return int(min(MAX_TERMS, max(2.0, float(np.max(n, initial=2.0)))))


def g_a_from_k(k, a) -> np.ndarray:
    """Vectorised ``g_a`` over preimages ``k`` (no domain checks; needs ``|k| < 1``)."""
    a = RobinCoupling.coerce(a).a
    k = np.asarray(k, dtype=complex)
    kap = _kappa(k, a)
    kap_abs = np.abs(kap)
    finite = np.isfinite(kap_abs)
    terms = _max_terms(np.abs(k[finite]), kap_abs[finite]) if finite.any() else 2
    out = kernels.sup_modulus(k.ravel(), kap.ravel(), TAIL_CUTOFF, terms)
    return out.reshape(k.shape)


def g_a(p, a) -> float:
    """``max(1, sup_n |1 - kappa k^{2n-1}|)`` with ``kappa = (k - a)/(1 - a k)``.

    Returns ``inf`` at the eigenvalue ``a + 1/a`` (``|a| > 1``).
    """
    k = SpectralPoint.coerce(p).k
    if abs(k) >= 1.0 - DISK_MARGIN:
        raise DomainError("g_a is only evaluated strictly inside the unit disk (z off [-2, 2])")
    a = RobinCoupling.coerce(a).a
    if _at_pole(k, a):
        return math.inf
    return float(g_a_from_k(np.array([k]), a)[0])


def g_a_upper(p, a) -> float:
    """Explicit bound ``1 + |kappa|`` valid on the closed disk."""
    k = SpectralPoint.coerce(p).k
    a = RobinCoupling.coerce(a).a
    return float(1.0 + np.abs(_kappa(k, a)))


def sup_attaining_site(p, a, tol: float = 1e-12) -> int:
    """Smallest ``n`` with ``|1 - kappa k^{2n-1}| >= g_a - tol`` (``0`` if only the limit attains)."""
    p = SpectralPoint.coerce(p)
    k = p.k
    a = RobinCoupling.coerce(a).a
    g = g_a(p, a)
    if not math.isfinite(g):
        raise PoleError("sup is infinite at the eigenvalue")
    kap = complex(_kappa(k, a))
    c = kap * k
    k2 = k * k
    n = 1
    while abs(c) >= TAIL_CUTOFF and 1.0 + abs(c) >= g - tol:
        if abs(1.0 - c) >= g - tol:
            return n
        c *= k2
        n += 1
    return 0


def gamma_a(p, a) -> float:
    """``sup_{m,n} |G_{m,n}(z)| = g_a(z) / |1/k - k|``."""
    p = SpectralPoint.coerce(p)
    return g_a(p, a) / abs(1.0 / p.k - p.k)


@dataclass(frozen=True)
class EigenSolution:
    """Solution of ``J_a psi = (k + 1/k) psi`` satisfying the boundary row."""

    k: complex
    a: complex

    def __post_init__(self):
        object.__setattr__(self, "k", complex(self.k))
        object.__setattr__(self, "a", RobinCoupling.coerce(self.a).a)
        if self.k == 0:
            raise DomainError("k must be nonzero")

    @property
    def z(self) -> complex:
        return self.k + 1.0 / self.k

    def values(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=np.int64)
        k, a = self.k, self.a
        if k == 1 or k == -1:
            s = k.real
            return (s ** n) * (n - s * a * (n - 1)) + 0j
        return (k - a) * k ** (n - 1) - (1.0 / k - a) * k ** (1 - n)

    def residual(self, N: int) -> float:
        """``||(J_a - z) psi|| / ||psi||`` on the ``N``-section (last row excluded)."""
        psi = self.values(np.arange(1, N + 1))
        M = build_truncation(self.a, None, N)
        r = M.matvec(psi) - self.z * psi
        return float(np.linalg.norm(r[:-1]) / np.linalg.norm(psi))


def eigenvector(a) -> EigenSolution:
    a = RobinCoupling.coerce(a)
    if not a.has_eigenvalue:
        raise DomainError("J_a has an eigenvalue only when |a| > 1")
    return EigenSolution(1.0 / a.a, a.a)


def _check_real_a(a) -> float:
    a = float(a)
    if not 0.0 <= a < 1.0:
        raise DomainError(f"coupling must lie in [0, 1), got {a!r}")
    return a


def g_m_theta(theta, a, m: int):
    """``|sin(m t) - a sin((m-1) t)| / (|sin t| sqrt(1 + a^2 - 2a cos t))``.

    Evaluated through ``sin(j t)/sin t = U_{j-1}(cos t)`` so ``t = 0`` and
    ``t = +-pi`` come out as the continuous extension without special cases.
    """
    a = _check_real_a(a)
    if m < 1:
        raise ParamError("m must be >= 1")
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta)
    u_prev = np.zeros_like(c)       # U_{-1}
    u = np.ones_like(c)             # U_0
    for _ in range(m - 1):
        u_prev, u = u, 2.0 * c * u - u_prev
    val = np.abs(u - a * u_prev) / np.sqrt(1.0 + a * a - 2.0 * a * c)
    return float(val) if val.ndim == 0 else val


def g_m_theta_literal(theta, a, m: int):
    """Direct transcription (undefined at ``sin t = 0``)."""
    theta = np.asarray(theta, dtype=float)
    return (np.abs(np.sin(m * theta) - a * np.sin((m - 1) * theta))
            / (np.abs(np.sin(theta)) * np.sqrt(1.0 + a * a - 2.0 * a * np.cos(theta))))


def g_m_max(a, m: int, grid: int = 4097) -> tuple[float, float]:
    """Maximise ``g_m(.; a)`` over ``[-pi, pi]``: grid scan on ``[0, pi]`` then bounded refinement."""
    a = _check_real_a(a)
    th = np.linspace(0.0, math.pi, max(grid, 8 * m + 1))
    vals = g_m_theta(th, a, m)
    i = int(np.argmax(vals))
    h = th[1] - th[0]
    lo, hi = max(0.0, th[i] - h), min(math.pi, th[i] + h)
    res = minimize_scalar(lambda t: -g_m_theta(t, a, m), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    cands = [(vals[i], th[i]), (-res.fun, res.x), (g_m_theta(lo, a, m), lo), (g_m_theta(hi, a, m), hi)]
    best, where = max(cands)
    return float(where), float(best)


def g_m_at_zero(a, m: int) -> float:
    a = _check_real_a(a)
    return (m - a * (m - 1)) / (1.0 - a)


def kernel_global_max(a, m: int, n: int) -> float:
    """Bound ``a/(1-a) + min(m, n)`` on ``|G_{m,n}|`` over the unit disk, ``a in [0, 1)``."""
    a = _check_real_a(a)
    return a / (1.0 - a) + min(m, n)
