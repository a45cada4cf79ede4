"""Spectral enclosures for ``J_a + V`` with ``||v||_1 <= Q``.

The enclosure is ``{+-2} | {z : sqrt|z^2 - 4| <= g_a(z) Q}``.  Its boundary is
traced in the ``k``-disk, where the indicator is smooth away from the
pole ``k = 1/a``, and pushed to the ``z``-plane with the Joukowski map.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import kernels
from .errors import DomainError, EmptyCurve, NotOnBoundary, NumericalError, ParamError, RealTarget
from .lattice import RobinCoupling, SpectralPoint, inverse_joukowski
from .resolvent import g_a, g_a_from_k, green_evaluator, sup_attaining_site

DEFAULT_GRID = 800
DEFAULT_DELTA = 1e-3
NEG_FILL = -1e6        # stands in for -inf at the pole so the contour stays finite
BOUNDARY_TOL = 1e-8


def _check_Q(Q) -> float:
    Q = float(Q)
    if not (Q > 0 and math.isfinite(Q)):
        raise ParamError(f"Q must be a positive finite number, got {Q!r}")
    return Q


def _threshold_value(k: complex, a: complex, Q: float) -> float:
    # On |k| = 1 the terms do not decay: k^(2n-1) = k, so the sup is |1 - kappa k|.
    den = 1.0 - a * k
    if den == 0:
        kap = -1.0 if k == 1 else 1.0  # limit of (k - a)/(1 - a k) as a -> k^{-1}
    else:
        kap = (k - a) / den
    return -abs(1.0 - kap * k) * Q


def enclosure_indicator(z, a, Q) -> float:
    """``F(z) = sqrt|z^2 - 4| - g_a(z) Q``; ``F <= 0`` exactly on the enclosure."""
    Q = _check_Q(Q)
    a = RobinCoupling.coerce(a).a
    z = complex(z)
    if z.imag == 0.0 and abs(z.real) == 2.0:
        return _threshold_value(z.real / 2.0 + 0j, a, Q)
    if z.imag == 0.0 and abs(z.real) < 2.0:
        raise DomainError("the indicator is not defined on the open band (-2, 2)")
    p = inverse_joukowski(z)
    g = g_a(p, a)
    if math.isinf(g):
        return -math.inf
    return abs(1.0 / p.k - p.k) - g * Q


def simple_enclosure_member(z, a, Q) -> bool:
    """Membership in the larger set ``|1/k - k| |1 - a k| <= (|1 - a k| + |k - a|) Q``."""
    Q = _check_Q(Q)
    a = RobinCoupling.coerce(a).a
    z = complex(z)
    if z.imag == 0.0 and abs(z.real) == 2.0:
        return True
    k = inverse_joukowski(z).k
    return abs(1.0 / k - k) * abs(1.0 - a * k) <= (abs(1.0 - a * k) + abs(k - a)) * Q


# -- grids --------------------------------------------------------------------

def _unit_circle_table(M: int) -> np.ndarray:
    """``exp(2 pi i j / M)`` with exact quarter-turn and conjugation symmetry."""
    if M % 4:
        raise ParamError("angular resolution must be divisible by 4")
    q = M // 4
    j = np.arange(q + 1)
    c = np.cos(0.5 * math.pi * j / q)
    c[q] = 0.0
    quarter = c[:q] + 1j * c[q - j[:q]]
    return np.concatenate([quarter, 1j * quarter, -quarter, -1j * quarter])


@dataclass(frozen=True)
class PolarGrid:
    """Rows ``r_i`` uniform in ``[delta, 1 - delta]``, columns ``theta_j = 2 pi j / M`` (periodic)."""

    n_r: int
    n_theta: int
    delta: float = DEFAULT_DELTA

    @classmethod
    def square(cls, grid_n: int, delta: float = DEFAULT_DELTA) -> "PolarGrid":
        if grid_n < 64:
            raise ParamError("grid resolution must be >= 64")
        if not 0.0 < delta < 0.25:
            raise ParamError("delta must lie in (0, 0.25)")
        return cls(int(grid_n), 4 * ((int(grid_n) + 3) // 4), float(delta))

    @property
    def radii(self) -> np.ndarray:
        return np.linspace(self.delta, 1.0 - self.delta, self.n_r)

    @property
    def phases(self) -> np.ndarray:
        return _unit_circle_table(self.n_theta)

    def k_values(self) -> np.ndarray:
        return self.radii[:, None] * self.phases[None, :]

    def to_k(self, rows, cols) -> np.ndarray:
        dr = (1.0 - 2.0 * self.delta) / (self.n_r - 1)
        r = self.delta + np.asarray(rows) * dr
        th = np.asarray(cols) * (2.0 * math.pi / self.n_theta)
        return r * np.exp(1j * th)

    def metadata(self) -> dict:
        return {"n_r": self.n_r, "n_theta": self.n_theta, "r_min": self.delta, "r_max": 1.0 - self.delta}


@dataclass(frozen=True)
class GridField:
    """``g_a`` and ``|1/k - k|`` on a polar grid; reusable across budgets ``Q``."""

    a: complex
    grid: PolarGrid
    g: np.ndarray
    dist: np.ndarray

    @classmethod
    def compute(cls, a, grid: PolarGrid) -> "GridField":
        a = RobinCoupling.coerce(a).a
        k = grid.k_values()
        g = g_a_from_k(k, a)
        return cls(a, grid, g, np.abs(1.0 / k - k))

    def indicator(self, Q: float) -> np.ndarray:
        f = self.dist - self.g * Q
        return np.where(np.isfinite(f), f, NEG_FILL)


# -- contour linking --------------------------------------------------------------

def _link_segments(ea: np.ndarray, eb: np.ndarray, pts: np.ndarray):
    """Chain segments sharing edge ids into polylines of (row, col) points.

    Open chains are emitted first (ordered by their first segment), then
    closed loops; each loop repeats its first point at the end.
    """
    nseg = ea.shape[0]
    coord = {}
    touching = {}
    for s in range(nseg):
        for e, (r, c) in ((int(ea[s]), pts[s, 0:2]), (int(eb[s]), pts[s, 2:4])):
            coord.setdefault(e, (float(r), float(c)))
            touching.setdefault(e, []).append(s)
    used = np.zeros(nseg, dtype=bool)

    def walk(s, start_edge):
        chain = [coord[start_edge]]
        edge = start_edge
        while True:
            used[s] = True
            nxt = int(eb[s]) if int(ea[s]) == edge else int(ea[s])
            chain.append(coord[nxt])
            others = [t for t in touching[nxt] if not used[t]]
            if not others:
                return chain
            s, edge = others[0], nxt

    lines = []
    for s in range(nseg):
        if used[s]:
            continue
        ends = [e for e in (int(ea[s]), int(eb[s])) if len(touching[e]) == 1]
        if ends:
            lines.append((False, walk(s, ends[0])))
    for s in range(nseg):
        if not used[s]:
            lines.append((True, walk(s, int(ea[s]))))
    return lines


@dataclass(frozen=True, eq=False)
class EnclosureCurve:
    """Boundary of the enclosure for one budget ``Q``.

    ``polylines`` are complex arrays in the ``z``-plane; ``closed[i]`` marks
    loops.  ``features`` lists the set members drawn as points: the
    thresholds ``+-2`` and, when ``|a| > 1``, the eigenvalue ``a + 1/a``.
    """

    a: complex
    Q: float
    polylines: list
    closed: list
    features: list
    grid: dict = field(default_factory=dict)

    @property
    def n_polylines(self) -> int:
        return len(self.polylines)

    def vertices(self) -> np.ndarray:
        if not self.polylines:
            return np.zeros(0, dtype=complex)
        return np.concatenate(self.polylines)

    @property
    def has_pole(self) -> bool:
        return any(label == "eigenvalue" for label, _ in self.features)

    def cell_size(self) -> float:
        """Largest grid step in the ``k``-disk (radial or angular)."""
        dr = (self.grid["r_max"] - self.grid["r_min"]) / (self.grid["n_r"] - 1)
        return max(dr, 2.0 * math.pi / self.grid["n_theta"])

    def conjugation_defect(self) -> float:
        """Max distance from each vertex of the conjugated curve to the curve's vertex set."""
        v = self.vertices()
        if v.size == 0:
            return 0.0
        key = np.lexsort((v.imag, v.real))
        vs = v[key]
        w = np.conj(v)
        idx = np.searchsorted(vs.real, w.real)
        best = np.full(w.shape, np.inf)
        for off in (-2, -1, 0, 1, 2):
            j = np.clip(idx + off, 0, vs.size - 1)
            best = np.minimum(best, np.abs(vs[j] - w))
        # searchsorted on the real part alone can miss ties; fall back to brute force there.
        bad = best > 1e-9
        if bad.any():
            for i in np.flatnonzero(bad):
                best[i] = np.min(np.abs(v - w[i]))
        return float(best.max())


def _features(a: complex):
    feats = [("threshold", -2.0 + 0j), ("threshold", 2.0 + 0j)]
    if abs(a) > 1.0:
        feats.append(("eigenvalue", a + 1.0 / a))
    return feats


def curve_from_field(fld: GridField, Q: float) -> EnclosureCurve:
    Q = _check_Q(Q)
    f = fld.indicator(Q)
    if np.all(f > 0) or np.all(f <= 0):
        raise EmptyCurve(f"indicator has constant sign on the grid for Q={Q}")
    ea, eb, pts = kernels.marching_segments(f)
    lines, closed = [], []
    for is_closed, chain in _link_segments(ea, eb, pts):
        rc = np.asarray(chain)
        k = fld.grid.to_k(rc[:, 0], rc[:, 1])
        lines.append(k + 1.0 / k)
        closed.append(is_closed)
    return EnclosureCurve(fld.a, Q, lines, closed, _features(fld.a), fld.grid.metadata())


def trace_boundaries(a, Qs, grid_n: int = DEFAULT_GRID, delta: float = DEFAULT_DELTA):
    """Boundary curves for several budgets sharing one ``g_a`` grid."""
    fld = GridField.compute(a, PolarGrid.square(grid_n, delta))
    return [curve_from_field(fld, Q) for Q in Qs]


def trace_boundary(a, Q, grid_n: int = DEFAULT_GRID, delta: float = DEFAULT_DELTA) -> EnclosureCurve:
    """Zero contour of the indicator by marching squares on the polar ``k``-grid."""
    return trace_boundaries(a, [Q], grid_n, delta)[0]


# -- optimality -------------------------------------------------------------------

def _indicator_on_ray(a: complex, Q: float, phase: complex):
    def F(r):
        k = r * phase
        if 1.0 - a * k == 0:
            return -math.inf
        return abs(1.0 / k - k) - float(g_a_from_k(np.array([k]), a)[0]) * Q
    return F


def boundary_point_on_ray(a, Q, z, delta: float = DEFAULT_DELTA, samples: int = 2000) -> complex:
    """Outermost boundary point with the same ``arg k`` as ``z``.

    Scans ``F(r e^{i arg k})`` on ``r in [delta, 1 - delta]`` and refines the
    first sign change (smallest ``r``, i.e. largest ``|z|``) with Brent's method.
    """
    Q = _check_Q(Q)
    a = RobinCoupling.coerce(a).a
    k = inverse_joukowski(z).k
    phase = k / abs(k)
    F = _indicator_on_ray(a, Q, phase)
    rs = np.linspace(delta, 1.0 - delta, samples)
    vals = np.array([F(r) for r in rs])
    vals = np.where(np.isfinite(vals), vals, NEG_FILL)
    change = np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))
    if change.size == 0:
        raise NotOnBoundary("the ray through z does not meet the enclosure boundary")
    i = int(change[0])
    if vals[i] == 0.0:
        r = rs[i]
    else:
        r = brentq(F, rs[i], rs[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    kb = r * phase
    return kb + 1.0 / kb


@dataclass(frozen=True)
class RealBoundaryProbe:
    """A real boundary point ``x`` and how close a rank-one potential gets to having it as an eigenvalue."""

    x: float
    g: float
    n_best: int
    attained: bool
    eigen_residual: float  # |1 + omega G_{n,n}(x)| for the best site and |omega| = Q


def real_boundary_near_misses(a, Q, delta: float = DEFAULT_DELTA, samples: int = 4000) -> list:
    """Probe the real boundary points outside ``[-2, 2]``; reports evidence and asserts nothing.

    For each real ``x`` with ``F(x) = 0`` the best finite site ``n`` is the
    one maximising ``|1 - kappa k^(2n-1)|``.  When the sup defining ``g_a``
    is only reached as ``n -> infinity`` no rank-one witness exists and the
    residual measures the near miss.
    """
    Q = _check_Q(Q)
    a = RobinCoupling.coerce(a).a
    out = []
    for sign in (1.0, -1.0):
        F = _indicator_on_ray(a, Q, sign + 0j)
        rs = np.linspace(delta, 1.0 - delta, samples)
        vals = np.array([F(r) for r in rs])
        vals = np.where(np.isfinite(vals), vals, NEG_FILL)
        for i in np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:])):
            if NEG_FILL in (vals[i], vals[i + 1]):
                continue  # sign flip across the pole, not a boundary crossing
            r = rs[i] if vals[i] == 0.0 else brentq(F, rs[i], rs[i + 1], xtol=1e-15, maxiter=200)
            k = sign * r
            kap = (k - a) / (1.0 - a * k)
            c, best, n_best, n = kap * k, -1.0, 1, 1
            while abs(c) >= 1e-14:
                t = abs(1.0 - c)
                if t > best:
                    best, n_best = t, n
                c *= k * k
                n += 1
            g = g_a(SpectralPoint.from_k(k + 0j), a)
            # a finite site attains the sup only if it reaches g without relying on the limit value 1
            attained = best >= g - 1e-12 and best >= 1.0
            out.append(RealBoundaryProbe(x=float(k + 1.0 / k), g=g, n_best=n_best, attained=attained,
                                         eigen_residual=max(0.0, 1.0 - best / g)))
    return sorted(out, key=lambda p: p.x)


@dataclass(frozen=True)
class OptimalityWitness:
    """Rank-one potential ``omega P_n`` with ``|omega| = Q`` having ``z`` as an eigenvalue."""

    n: int
    omega: complex
    z: complex
    a: complex
    Q: float

    def residual(self) -> float:
        """``|1 + omega G_{n,n}(z)|``; zero for an exact eigenvalue."""
        ev = green_evaluator(self.a)
        return abs(1.0 + self.omega * ev.diagonal(self.z, self.n))


def construct_optimality_witness(a, Q, z, tol: float = BOUNDARY_TOL) -> OptimalityWitness:
    """Build ``(n, omega)`` so that ``z`` is an eigenvalue of ``J_a + omega P_n``.

    ``n`` is the smallest site attaining the sup defining ``g_a(z)``; the
    phase of ``omega`` solves ``1 + omega G_{n,n}(z) = 0``.
    """
    Q = _check_Q(Q)
    a = RobinCoupling.coerce(a).a
    z = complex(z)
    if z.imag == 0.0:
        raise RealTarget("optimality is only asserted for non-real boundary points")
    F = enclosure_indicator(z, a, Q)
    if not abs(F) <= tol:
        raise NotOnBoundary(f"z is not on the enclosure boundary (F = {F:.3e})")
    p = SpectralPoint.from_z(z)
    n = sup_attaining_site(p, a)
    if n == 0:
        raise NumericalError("the sup defining g_a is not attained at a finite site")
    G = green_evaluator(a).diagonal(p, n)
    omega = Q * complex(np.exp(1j * np.angle(-1.0 / G)))
    return OptimalityWitness(n, omega, z, a, Q)
