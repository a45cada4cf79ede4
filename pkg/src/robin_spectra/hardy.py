"""Discrete Hardy inequalities ``-Delta_a >= W`` on the half-line."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from . import kernels
from .errors import DomainError, ParamError, SuperharmonicityViolation

SERIES_TERMS = 30


def q_max(a) -> float:
    """``q_a = min(log2(2 - a), 1/2)``: largest admissible power for coupling ``a in [0, 1)``."""
    a = float(a)
    if not 0.0 <= a < 1.0:
        raise DomainError(f"coupling must lie in [0, 1), got {a!r}")
    return min(math.log2(2.0 - a), 0.5)


def _series_coefficients(q: float, terms: int) -> np.ndarray:
    # (1-q)_{2k-1} / (2k)!, rising factorial, for k = 1..terms.
    coef = np.empty(terms)
    c = (1.0 - q) / 2.0
    for k in range(1, terms + 1):
        coef[k - 1] = c
        c *= (2 * k - q) * (2 * k + 1 - q) / ((2 * k + 1) * (2 * k + 2))
    return coef


def power_weight(q: float, n) -> np.ndarray:
    """``2 - (1 - 1/n)^q - (1 + 1/n)^q`` without cancellation.

    For ``n >= 2`` uses the positive series ``2q sum_k (1-q)_{2k-1}/(2k)! n^{-2k}``
    summed smallest term first; ``n = 1`` is ``2 - 2^q``.
    """
    n = np.asarray(n, dtype=np.float64)
    x2 = 1.0 / (n * n)
    coef = _series_coefficients(q, SERIES_TERMS)
    powers = x2[..., None] ** np.arange(1, SERIES_TERMS + 1)
    out = 2.0 * q * np.sum((coef * powers)[..., ::-1], axis=-1)
    return np.where(n == 1, 2.0 - 2.0 ** q, out)


def power_weight_direct(q: float, n) -> np.ndarray:
    n = np.asarray(n, dtype=np.float64)
    return 2.0 - (1.0 - 1.0 / n) ** q - (1.0 + 1.0 / n) ** q


def power_weight_series(q: float, n, terms: int) -> np.ndarray:
    """Truncated series with ``terms`` terms."""
    n = np.asarray(n, dtype=np.float64)
    coef = _series_coefficients(q, terms)
    powers = (1.0 / (n * n))[..., None] ** np.arange(1, terms + 1)
    return 2.0 * q * np.sum(coef * powers, axis=-1)


class WeightKind(enum.Enum):
    CLASSICAL = "Classical"
    POWER = "PowerGenerated"
    ROBIN = "RobinCoupled"


@dataclass(frozen=True)
class HardyWeight:
    """A Hardy weight for ``-Delta_0`` (classical, power) or ``-Delta_a`` (Robin)."""

    kind: WeightKind
    q: float = 0.5
    a: float = 0.0

    def __post_init__(self):
        if self.kind is WeightKind.POWER and not 0.0 < self.q <= 0.5:
            raise ParamError(f"q must lie in (0, 1/2], got {self.q!r}")
        if self.kind is WeightKind.ROBIN:
            qa = q_max(self.a)
            if not 0.0 < self.q <= qa:
                raise ParamError(f"q must lie in (0, q_a] = (0, {qa:.7g}], got {self.q!r}")

    @classmethod
    def classical(cls) -> "HardyWeight":
        return cls(WeightKind.CLASSICAL)

    @classmethod
    def power(cls, q: float) -> "HardyWeight":
        return cls(WeightKind.POWER, float(q))

    @classmethod
    def robin(cls, q: float, a: float) -> "HardyWeight":
        return cls(WeightKind.ROBIN, float(q), float(a))

    def values(self, n) -> np.ndarray:
        n = np.asarray(n)
        if np.any(n < 1):
            raise ParamError("sites are 1-based")
        if self.kind is WeightKind.CLASSICAL:
            return 0.25 / (np.asarray(n, dtype=float) ** 2)
        w = power_weight(self.q, n)
        if self.kind is WeightKind.ROBIN:
            w = w - self.a * (n == 1)
        return w

    def __call__(self, n):
        return self.values(n)

    def generator(self) -> "GeneratorSequence":
        if self.kind is WeightKind.CLASSICAL:
            raise ParamError("the classical weight is not generated by a power sequence here")
        return GeneratorSequence.power(self.q)


def weight(kind: HardyWeight, n):
    """``w_n`` for the weight ``kind``; scalar in, scalar out."""
    w = kind.values(n)
    return float(w) if np.ndim(w) == 0 else w


@dataclass(frozen=True)
class GeneratorSequence:
    """Positive sequence ``g_1, g_2, ...`` given by a vectorised rule ``n -> g_n``."""

    rule: Callable[[np.ndarray], np.ndarray]
    label: str = "g"

    @classmethod
    def power(cls, q: float) -> "GeneratorSequence":
        q = float(q)
        return cls(lambda n: np.asarray(n, dtype=float) ** q, f"n^{q:g}")

    @classmethod
    def from_values(cls, values) -> "GeneratorSequence":
        """Finite table ``g_1..g_L``; sites beyond ``L`` raise."""
        vals = np.asarray(values, dtype=float)

        def rule(n):
            n = np.asarray(n)
            if np.any(n > vals.size):
                raise ParamError(f"generator table has only {vals.size} entries")
            return vals[n - 1]
        return cls(rule, "table")

    def values(self, n_max: int) -> np.ndarray:
        """``(g_0, g_1, ..., g_{n_max})`` with ``g_0 = 0``."""
        out = np.zeros(n_max + 1)
        out[1:] = self.rule(np.arange(1, n_max + 1))
        return out

    def laplacian(self, n_max: int) -> np.ndarray:
        """``(-Delta_0 g)_n = 2 g_n - g_{n-1} - g_{n+1}`` for ``n = 1..n_max``."""
        g = self.values(n_max + 1)
        return 2.0 * g[1:-1] - g[:-2] - g[2:]

    def check(self, n_max: int) -> None:
        """Raise unless ``g > 0`` and ``-Delta_0 g >= 0`` on ``1..n_max``."""
        g = self.values(n_max + 1)
        if np.any(g[1:] <= 0):
            raise SuperharmonicityViolation("generator must be positive")
        lap = 2.0 * g[1:-1] - g[:-2] - g[2:]
        scale = 2.0 * g[1:-1] + g[:-2] + g[2:]
        bad = np.flatnonzero(lap < -1e-13 * scale)
        if bad.size:
            n = int(bad[0]) + 1
            raise SuperharmonicityViolation(f"(-Delta_0 g)_{n} = {lap[bad[0]]:.3e} < 0")


def generated_weights(g: GeneratorSequence, n_max: int, check: bool = True) -> np.ndarray:
    """``w_n = (-Delta_0 g)_n / g_n`` for ``n = 1..n_max``."""
    if check:
        g.check(n_max)
    vals = g.values(n_max + 1)
    return (2.0 * vals[1:-1] - vals[:-2] - vals[2:]) / vals[1:-1]


def generated_weight(g: GeneratorSequence, n: int) -> float:
    return float(generated_weights(g, n)[n - 1])


def identity_terms(u, g: GeneratorSequence) -> tuple[list, list, list]:
    """Summands of the three sides of the ground-state identity for ``u_1..u_L``.

    ``sum |u_n - u_{n-1}|^2 = sum w_n |u_n|^2
        + sum_{n>=2} |sqrt(g_{n-1}/g_n) u_n - sqrt(g_n/g_{n-1}) u_{n-1}|^2``
    with ``u_0 = 0``; all sums run over ``n = 1..L+1``.
    """
    u = np.asarray(u, dtype=complex)
    L = u.size
    uu = np.zeros(L + 2, dtype=complex)
    uu[1:L + 1] = u
    gv = g.values(L + 1)
    w = generated_weights(g, L)
    lhs = np.abs(uu[1:] - uu[:-1]) ** 2
    hardy = w * np.abs(u) ** 2
    ratio = np.sqrt(gv[1:L + 1] / gv[2:L + 2])  # sqrt(g_{n-1}/g_n) for n = 2..L+1
    rem = np.abs(ratio * uu[2:L + 2] - uu[1:L + 1] / ratio) ** 2
    return lhs.tolist(), hardy.tolist(), rem.tolist()


def identity_residual(u, g: GeneratorSequence) -> float:
    lhs, hardy, rem = identity_terms(u, g)
    return abs(math.fsum(lhs + [-t for t in hardy] + [-t for t in rem]))


# -- cutoffs and optimality ------------------------------------------------------------

def log_cutoff(N: int, n) -> np.ndarray:
    """``xi^N_n``: 1 below ``N``, ``(2 log N - log n)/log N`` on ``[N, N^2]``, 0 beyond."""
    if N < 2:
        raise ParamError("N must be >= 2")
    n = np.asarray(n, dtype=float)
    L = math.log(N)
    mid = (2.0 * L - np.log(n)) / L
    return np.where(n < N, 1.0, np.where(n <= float(N) * N, mid, 0.0))


def linear_ramp(N: int, exact: bool = False):
    """``psi^(N)_n`` for ``n = 1..2N``: 1 below ``N``, ``(2N - n)/N`` on ``[N, 2N]``."""
    if N < 1:
        raise ParamError("N must be >= 1")
    if exact:
        return [Fraction(1) if n < N else Fraction(2 * N - n, N) for n in range(1, 2 * N + 1)]
    n = np.arange(1, 2 * N + 1)
    return np.where(n < N, 1.0, (2.0 * N - n) / N)


def optimality_certificate(q: float, N: int) -> float:
    """``S(N) = sum_{n>=2} g_n g_{n-1} |xi^N_n - xi^N_{n-1}|^2`` for ``g_n = n^q``.

    Only ``N < n <= N^2`` contribute; the block sum runs in the active kernel backend.
    """
    q = float(q)
    if not 0.0 < q <= 0.5:
        raise ParamError("q must lie in (0, 1/2]")
    if N < 2:
        raise ParamError("N must be >= 2")
    return kernels.certificate_sum(N + 1, N * N, q) / math.log(N) ** 2


def certificate_bound(N: int) -> float:
    return 4.0 / math.log(N)


def tail_rayleigh_minimum(q: float, n: int, N: int) -> float:
    """``min ||D psi||^2 / <psi, W psi>`` over ``psi`` supported on ``n..N`` with ``W = diag(w(q))``.

    One of the stronger optimality properties asks this to tend to 1 as
    ``N -> infinity`` for every ``n``.  A finite search can only give evidence.
    """
    if N <= n or n < 1:
        raise ParamError("need 1 <= n < N")
    w = power_weight(q, np.arange(n, N + 1))
    if np.any(w <= 0):
        raise ParamError("the weight must be positive on the window")
    d = 2.0 / w
    e = -1.0 / np.sqrt(w[:-1] * w[1:])
    return float(eigvalsh_tridiagonal(d, e, select="i", select_range=(0, 0))[0])


def neumann_form(psi) -> Fraction | float:
    """``<psi, (2 - J_1) psi> = 2 sum psi_n^2 - psi_1^2 - 2 sum psi_n psi_{n+1}`` for real ``psi``."""
    sq = sum(x * x for x in psi)
    cross = sum(x * y for x, y in zip(psi[:-1], psi[1:]))
    return 2 * sq - psi[0] * psi[0] - 2 * cross


def neumann_criticality_demo(N: int) -> tuple[float, float]:
    """Form of the Neumann Laplacian at the linear ramp, and ``1/N``; both computed exactly."""
    val = neumann_form(linear_ramp(N, exact=True))
    return float(val), float(Fraction(1, N))
