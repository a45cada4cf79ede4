"""Spectral-stability verdicts for ``J_a + V``, ``a in (-1, 1)``.

Everything is driven by the nonnegative kernel
``K'_{m,n} = sqrt|v_m| (alpha + min(m, n)) sqrt|v_n|`` with
``alpha = |a|/(1 - |a|)``.  For ``a < 0`` the unitary ``U = diag(1, -1, ...)``
maps ``J_a + V`` to ``-(J_{|a|} - V)``, and ``K'`` only sees ``|V|``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .errors import DivergentTail, DomainError, ParamError
from .hardy import HardyWeight, q_max
from .lattice import Potential

MAX_SITES = 1 << 22
TAIL_TARGET = 1e-8
POWER_TOL = 1e-10
POWER_MAXITER = 20_000
HARDY_Q_GRID = 64
POWER_SITES = 1 << 16    # largest section handed to the power iteration


def _real_coupling(a) -> float:
    a = complex(getattr(a, "a", a))
    if a.imag != 0.0 or not -1.0 < a.real < 1.0:
        raise DomainError("stability analysis needs a real coupling in (-1, 1)")
    return a.real


def _alpha(a) -> float:
    b = abs(_real_coupling(a))
    return b / (1.0 - b)


@dataclass(frozen=True, eq=False)
class KPrimeKernel:
    """``K'`` restricted to the explicit sites of ``V``; O(L) matvec via prefix sums."""

    a: float
    sites: np.ndarray
    absv: np.ndarray

    @classmethod
    def from_potential(cls, a, V: Potential) -> "KPrimeKernel":
        _alpha(a)
        keep = V.values != 0
        return cls(_real_coupling(a), V.sites[keep].astype(np.float64), np.abs(V.values[keep]))

    @property
    def alpha(self) -> float:
        return _alpha(self.a)

    @property
    def size(self) -> int:
        return int(self.sites.size)

    def dense(self) -> np.ndarray:
        x = np.sqrt(self.absv)
        mn = np.minimum.outer(self.sites, self.sites)
        return x[:, None] * (self.alpha + mn) * x[None, :]

    def matvec(self, y: np.ndarray) -> np.ndarray:
        x = np.sqrt(self.absv)
        u = x * y
        total = u.sum()
        # sum_j min(s_i, s_j) u_j = sum_{j<=i} s_j u_j + s_i sum_{j>i} u_j
        below = np.cumsum(self.sites * u)
        above = total - np.cumsum(u)
        return x * (self.alpha * total + below + self.sites * above)

    def hs_norm_sq(self) -> float:
        """``sum_{m,n} |v_m| (alpha + min)^2 |v_n|`` in O(L)."""
        v = self.absv
        later = np.cumsum(v[::-1])[::-1] - v      # sum_{j>k} |v_j|
        f = (self.alpha + self.sites) ** 2
        return math.fsum(f * v * (v + 2.0 * later))

    def first_moment(self) -> float:
        """``sum (alpha + n) |v_n|``."""
        return math.fsum((self.alpha + self.sites) * self.absv)


def _tail_moment(a, V: Potential, weight_power: int) -> float:
    """Upper bound of ``sum_{n beyond explicit} (alpha + n^s) |v_n|``, ``s = weight_power``."""
    if V.decay is None:
        return 0.0
    d = V.decay
    alpha = _alpha(a)
    need = weight_power + 1
    if d.p <= need:
        raise DivergentTail(f"decay exponent p = {d.p} must exceed {need} to certify the tail")
    return alpha * d.power_tail(d.p, d.start) + d.power_tail(d.p - weight_power, d.start)


def _complement_hs(kern: KPrimeKernel, tail: float) -> float:
    # Entries with an index in the tail: (alpha + min)^2 <= (alpha + m)(alpha + n).
    A = kern.first_moment()
    return math.sqrt(2.0 * A * tail + tail * tail)


def _with_tail(a, V: Potential, tail_tol: float, weight_power: int):
    """Extend a generated potential until the tail bound is below ``tail_tol``."""
    tail = _tail_moment(a, V, weight_power)
    while tail > tail_tol and V.generator is not None and V.decay.start <= MAX_SITES:
        V = V.extend(min(MAX_SITES, 2 * max(V.decay.start, 1024)))
        tail = _tail_moment(a, V, weight_power)
    return V, tail


def kprime_hs_norm_sq(a, V: Potential, tail_tol: float = TAIL_TARGET) -> float:
    """Certified upper bound of ``||K'||_HS^2`` (exact for finite support)."""
    V, tail = _with_tail(a, V, tail_tol, 1)
    kern = KPrimeKernel.from_potential(a, V)
    hs = kern.hs_norm_sq()
    if tail == 0.0:
        return hs
    if tail > tail_tol:
        raise DivergentTail(f"tail bound {tail:.3e} exceeds tolerance {tail_tol:.3e}")
    return hs + 2.0 * kern.first_moment() * tail + tail * tail


@dataclass(frozen=True)
class NormBracket:
    lower: float
    upper: float
    exact: bool = False
    sites: int = 0
    iterations: int = 0


def _power_bracket(kern: KPrimeKernel, tol: float, maxiter: int):
    # K' is symmetric PSD and entrywise positive on its support: the Rayleigh quotient
    # is a lower bound and the Collatz-Wielandt max ratio an upper bound for ||K'||.
    y = np.sqrt(kern.absv) * np.sqrt(kern.sites)
    y /= np.linalg.norm(y)
    # Rounding in the O(L) prefix sums is covered by inflating the final upper bound.
    inflate = 1.0 + 4e-15 * kern.size
    lower, upper = 0.0, math.inf
    it = 0
    for it in range(1, maxiter + 1):
        Ky = kern.matvec(y)
        lower = max(lower, float(y @ Ky))
        upper = min(upper, float(np.max(Ky / y)))
        nrm = np.linalg.norm(Ky)
        if nrm == 0:
            return 0.0, 0.0, it
        y = Ky / nrm
        if upper - lower <= tol * upper:
            break
    return lower, upper * inflate, it


def _adaptive_section(a, V: Potential) -> int:
    """Smallest section (doubling from 4096 sites) whose complement moment is below ``TAIL_TARGET``."""
    if V.nnz == 0:
        return 1
    moment = (_alpha(a) + V.sites) * np.abs(V.values)
    rest = np.cumsum(moment[::-1])[::-1]       # rest[i] = sum over sites[i:]
    N = 4096
    while N < min(V.support_bound, POWER_SITES):
        i = int(np.searchsorted(V.sites, N, side="right"))
        if i >= V.nnz or rest[i] <= TAIL_TARGET:
            break
        N *= 2
    return min(N, POWER_SITES, V.support_bound)


def kprime_op_norm(a, V: Potential, N: int | None = None, tol: float = POWER_TOL) -> NormBracket:
    """Certified bracket ``lower <= ||K'|| <= upper``.

    ``N`` restricts the power iteration to sites ``<= N`` (by default the
    section grows until the remainder is negligible, up to ``POWER_SITES``);
    the discarded part enters the upper bound through its Hilbert-Schmidt
    norm.  Rank-one potentials are exact.
    """
    alpha = _alpha(a)
    full, tail = _with_tail(a, V, TAIL_TARGET, 1)
    if N is None:
        N = _adaptive_section(a, full)
    sec = full.section(N)
    kern = KPrimeKernel.from_potential(a, sec)
    if kern.size == 0 and tail == 0.0 and (N is None or sec.nnz == full.nnz):
        return NormBracket(0.0, 0.0, True, 0, 0)
    rest_kern = None
    if sec.nnz < full.nnz:
        rest = full.sites > N
        rest_kern = KPrimeKernel.from_potential(a, Potential(full.sites[rest], full.values[rest]))
    if kern.size == 1 and tail == 0.0 and rest_kern is None:
        val = float(kern.absv[0] * (alpha + kern.sites[0]))
        return NormBracket(val, val, True, 1, 0)
    lower, upper, it = (0.0, 0.0, 0) if kern.size == 0 else _power_bracket(kern, tol, POWER_MAXITER)
    # Tail: everything outside the section, bounded in Hilbert-Schmidt norm.
    t1 = tail + (rest_kern.first_moment() if rest_kern is not None else 0.0)
    if t1 > 0.0:
        upper += _complement_hs(kern, t1)
        upper = min(upper, math.sqrt(kprime_hs_norm_sq(a, full, max(TAIL_TARGET, tail))))
    else:
        upper = min(upper, math.sqrt(kern.hs_norm_sq()) * (1.0 + 1e-14))
    return NormBracket(lower, upper, False, kern.size, it)


def weighted_l1_sum(a, V: Potential) -> float:
    """``sum_n (alpha + n^2) |v_n|`` including a certified tail bound."""
    alpha = _alpha(a)
    s = V.sites.astype(float)
    body = math.fsum((alpha + s * s) * np.abs(V.values))
    return body + _tail_moment(a, V, 2) if V.decay is not None else body


def hardy_ratio(a, V: Potential, q: float) -> float:
    """Smallest ``c`` with ``|v_n| <= c w_n`` for the Robin-coupled weight ``(q, |a|)``."""
    b = abs(_real_coupling(a))
    w = HardyWeight.robin(q, b)
    keep = V.values != 0
    n = V.sites[keep]
    if n.size == 0:
        c = 0.0
    else:
        wn = w.values(n)
        absv = np.abs(V.values[keep])
        with np.errstate(divide="ignore"):
            c = float(np.max(np.where(wn > 0, absv / wn, np.inf)))
    if V.decay is not None:
        d = V.decay
        # w_n >= q (1 - q) / n^2 for n >= 2 (first series term, all terms positive).
        if d.p < 2.0:
            return math.inf
        start = max(d.start, 2)
        c = max(c, d.C * start ** (2.0 - d.p) / (q * (1.0 - q)))
        if d.start == 1:
            w1 = float(w.values(1))
            c = max(c, d.C / w1 if w1 > 0 else math.inf)
    return c


def hardy_pointwise_condition(a, V: Potential, q: float, c: float) -> bool:
    """``|v_n| <= c * w_n`` for every site, with ``w`` the Robin-coupled weight ``(q, a)``."""
    a = _real_coupling(a)
    if a < 0.0:
        raise DomainError("the Hardy condition is stated for a in [0, 1)")
    qa = q_max(a)
    if not 0.0 < q <= qa:
        raise ParamError(f"q must lie in (0, {qa:.7g}]")
    # a few ulps of slack: c is usually itself a computed ratio
    return hardy_ratio(a, V, q) <= c * (1.0 + 8.0 * np.finfo(float).eps)


def best_hardy_ratio(a, V: Potential, grid: int = HARDY_Q_GRID) -> tuple[float, float]:
    """Minimise :func:`hardy_ratio` over ``q`` on a uniform grid of ``(0, q_a]``."""
    qa = q_max(abs(_real_coupling(a)))
    best = (math.inf, qa)
    for q in qa * np.arange(1, grid + 1) / grid:
        best = min(best, (hardy_ratio(a, V, float(q)), float(q)))
    return best


def form_subordination_min_eig(a, V: Potential, c: float, N: int) -> float:
    """Smallest eigenvalue of ``c (2 - J_a) - |V|`` (``a >= 0``) or ``c (2 + J_a) - |V|`` (``a < 0``) on ``N`` sites."""
    a = _real_coupling(a)
    s = 1.0 if a >= 0 else -1.0
    d = c * 2.0 - np.abs(V.dense(N))
    d[0] -= s * c * a
    e = np.full(N - 1, -s * c)
    return float(eigvalsh_tridiagonal(d, e, select="i", select_range=(0, 0))[0])


class Level(enum.Enum):
    PURELY_CONTINUOUS = "PurelyContinuous"
    NO_DISCRETE_SPECTRUM = "NoDiscreteSpectrum"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Evidence:
    condition: str
    value: float
    threshold: float = 1.0
    detail: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        val = self.value if math.isfinite(self.value) else None
        return {"condition": self.condition, "value": val, "threshold": self.threshold, **self.detail}


@dataclass(frozen=True)
class StabilityVerdict:
    level: Level
    evidence: list

    def fired(self) -> list:
        bound = (lambda v: v < 1.0) if self.level is Level.PURELY_CONTINUOUS else (lambda v: v <= 1.0)
        return [e for e in self.evidence if bound(e.value)] if self.level is not Level.INCONCLUSIVE else []

    def to_json_obj(self) -> dict:
        return {"level": self.level.value, "evidence": [e.to_json_obj() for e in self.evidence]}


def verdict(a, V: Potential, N: int | None = None) -> StabilityVerdict:
    """Strongest stability level certified by any of the implemented conditions.

    Every evidence value is a certified upper bound for ``||K'||`` (or the
    best Hardy constant, which dominates it): ``< 1`` gives purely continuous
    spectrum, ``<= 1`` rules out discrete eigenvalues.
    """
    _alpha(a)
    ev = []

    def attempt(name, fn):
        try:
            ev.append(fn())
        except DivergentTail as exc:
            ev.append(Evidence(name, math.inf, detail={"note": str(exc)}))

    def op():
        br = kprime_op_norm(a, V, N)
        return Evidence("operator_norm", br.upper, detail={"lower": br.lower, "exact": br.exact})

    attempt("operator_norm", op)
    attempt("hilbert_schmidt", lambda: Evidence("hilbert_schmidt", math.sqrt(kprime_hs_norm_sq(a, V))))
    attempt("weighted_l1", lambda: Evidence("weighted_l1", weighted_l1_sum(a, V)))

    def hardy():
        c, q = best_hardy_ratio(a, V)
        return Evidence("hardy_pointwise", c, detail={"q": q})

    attempt("hardy_pointwise", hardy)
    vals = [e.value for e in ev]
    if any(v < 1.0 for v in vals):
        level = Level.PURELY_CONTINUOUS
    elif any(v <= 1.0 for v in vals):
        level = Level.NO_DISCRETE_SPECTRUM
    else:
        level = Level.INCONCLUSIVE
    return StabilityVerdict(level, ev)
