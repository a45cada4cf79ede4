"""Foundational objects for the Robin Jacobi operator ``J_a + V`` on the half-line.

Sequences are 1-based: index ``0`` of an array holds site ``n = 1``.  The
virtual value ``psi_0 = 0`` used by the backward difference is never stored.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from .errors import DomainError, ParamError, SizeError

JOUKOWSKI_TOL = 1e-12


def _finite_complex(x, name="value") -> complex:
    x = complex(x)
    if not (math.isfinite(x.real) and math.isfinite(x.imag)):
        raise DomainError(f"{name} must be finite, got {x!r}")
    return x


class CouplingClass(enum.Enum):
    REAL_UNIT_INTERVAL = "RealUnitInterval"   # a in [0, 1)
    REAL_SYMMETRIC = "RealSymmetric"          # a in (-1, 1)
    SUB_UNIT = "SubUnit"                      # |a| <= 1
    SUPER_UNIT = "SuperUnit"                  # |a| > 1


@dataclass(frozen=True)
class RobinCoupling:
    """Boundary coupling ``a`` (the ``(1, 1)`` entry of ``J_a``)."""

    a: complex

    def __post_init__(self):
        object.__setattr__(self, "a", _finite_complex(self.a, "coupling a"))

    @classmethod
    def coerce(cls, a) -> "RobinCoupling":
        return a if isinstance(a, RobinCoupling) else cls(a)

    @property
    def is_real(self) -> bool:
        return self.a.imag == 0.0

    @property
    def kind(self) -> CouplingClass:
        """Most specific class containing ``a``; recomputed on every access."""
        a = self.a
        if self.is_real and 0.0 <= a.real < 1.0:
            return CouplingClass.REAL_UNIT_INTERVAL
        if self.is_real and -1.0 < a.real < 1.0:
            return CouplingClass.REAL_SYMMETRIC
        if abs(a) <= 1.0:
            return CouplingClass.SUB_UNIT
        return CouplingClass.SUPER_UNIT

    @property
    def has_eigenvalue(self) -> bool:
        return abs(self.a) > 1.0

    @property
    def eigenvalue(self) -> Optional[complex]:
        """``a + 1/a`` when ``|a| > 1``, else ``None``."""
        return self.a + 1.0 / self.a if self.has_eigenvalue else None


@dataclass(frozen=True)
class SpectralPoint:
    """A point ``z`` with its Joukowski preimage ``k`` (``z = k + 1/k``, ``|k| <= 1``)."""

    z: complex
    k: complex

    def __post_init__(self):
        z = _finite_complex(self.z, "z")
        k = _finite_complex(self.k, "k")
        if k == 0 or abs(k) > 1.0 + JOUKOWSKI_TOL:
            raise DomainError(f"spectral parameter k must satisfy 0 < |k| <= 1, got {k!r}")
        if abs(k + 1.0 / k - z) > JOUKOWSKI_TOL * max(1.0, abs(z)) * 10:
            raise DomainError("z and k are not related by z = k + 1/k")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "k", k)

    @classmethod
    def from_z(cls, z) -> "SpectralPoint":
        return inverse_joukowski(z)

    @classmethod
    def from_k(cls, k) -> "SpectralPoint":
        return cls(joukowski(k), k)

    @classmethod
    def coerce(cls, p) -> "SpectralPoint":
        return p if isinstance(p, SpectralPoint) else inverse_joukowski(p)


def joukowski(k) -> complex:
    """``z = k + 1/k`` for ``0 < |k| <= 1``."""
    k = _finite_complex(k, "k")
    if k == 0 or abs(k) > 1.0 + JOUKOWSKI_TOL:
        raise DomainError(f"joukowski requires 0 < |k| <= 1, got {k!r}")
    return k + 1.0 / k


def inverse_joukowski_k(z):
    """Vectorised root of ``k^2 - z k + 1 = 0`` with ``|k| <= 1`` (``Im k >= 0`` on ``[-2, 2]``)."""
    z = np.asarray(z, dtype=np.complex128)
    s = np.sqrt(z * z - 4.0)
    # Larger root via the sign choice avoiding cancellation, smaller root = 1/larger.
    flip = np.abs(z - s) > np.abs(z + s)
    s = np.where(flip, -s, s)
    big = 0.5 * (z + s)
    k = 1.0 / big
    on_band = (np.abs(np.abs(k) - 1.0) <= 1e-14) & (k.imag < 0)
    return np.where(on_band, np.conj(k), k)


def inverse_joukowski(z) -> SpectralPoint:
    """Spectral point over ``z``; the preimage ``k`` lies in the closed unit disk."""
    z = _finite_complex(z, "z")
    if z.imag == 0.0 and abs(z.real) <= 2.0:
        # Band: both roots on the unit circle; pick Im k >= 0.
        x = z.real / 2.0
        k = complex(x, math.sqrt(max(0.0, 1.0 - x * x)))
        return SpectralPoint(z, k)
    k = complex(inverse_joukowski_k(z))
    return SpectralPoint(z, k)


def difference_backward(psi) -> np.ndarray:
    """``(D psi)_n = psi_{n-1} - psi_n`` with ``psi_0 = 0``; output has one extra site."""
    psi = np.asarray(psi)
    out = np.zeros(psi.shape[0] + 1, dtype=np.result_type(psi, float))
    out[:-1] -= psi
    out[1:] += psi
    return out


def difference_forward(psi) -> np.ndarray:
    """``(D* psi)_n = psi_{n+1} - psi_n`` for ``n >= 1``."""
    psi = np.asarray(psi)
    out = -psi.astype(np.result_type(psi, float))
    out[:-1] += psi[1:]
    return out


@dataclass(frozen=True)
class Decay:
    """Declared tail bound ``|v_n| <= C n^(-p)`` for every ``n >= start``."""

    C: float
    p: float
    start: int

    def __post_init__(self):
        if self.C < 0 or not math.isfinite(self.C) or not math.isfinite(self.p):
            raise ParamError("decay constant must be finite and nonnegative")
        if self.start < 1:
            raise ParamError("decay start must be a site >= 1")

    def power_tail(self, s: float, n_from: int) -> float:
        """Upper bound of ``sum_{n >= n_from} C n^(-s)``; ``inf`` if ``s <= 1``."""
        n0 = max(n_from, self.start)
        if s <= 1.0:
            return math.inf
        return self.C * (n0 ** (-s) + n0 ** (1.0 - s) / (s - 1.0))


@dataclass(frozen=True, eq=False)
class Potential:
    """Complex diagonal potential ``V = diag(v_1, v_2, ...)``.

    ``sites`` (sorted, unique, >= 1) and ``values`` list the explicitly known
    entries; all other sites up to ``decay.start`` are zero.  An optional
    ``decay`` declares a bound on the entries beyond the explicit ones, and
    an optional ``generator`` can materialise them (``generator(n_array)``).
    """

    sites: np.ndarray
    values: np.ndarray
    decay: Optional[Decay] = None
    generator: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)

    def __post_init__(self):
        sites = np.asarray(self.sites, dtype=np.int64).ravel()
        values = np.asarray(self.values, dtype=np.complex128).ravel()
        if sites.shape != values.shape:
            raise ParamError("sites and values must have equal length")
        if sites.size and sites.min() < 1:
            raise ParamError("potential sites are 1-based")
        if not np.all(np.isfinite(values)):
            raise DomainError("potential entries must be finite")
        order = np.argsort(sites, kind="stable")
        sites, values = sites[order], values[order]
        if np.any(np.diff(sites) == 0):
            raise ParamError("duplicate site in potential")
        if self.decay is not None and sites.size and self.decay.start <= sites[-1]:
            raise ParamError("decay must start beyond the explicit entries")
        sites.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "values", values)

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls) -> "Potential":
        return cls(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=complex))

    @classmethod
    def point(cls, n: int, omega) -> "Potential":
        """Single-site potential ``omega * P_n``."""
        return cls(np.array([n]), np.array([complex(omega)]))

    @classmethod
    def from_entries(cls, entries: Mapping[int, complex]) -> "Potential":
        sites = np.fromiter(entries.keys(), dtype=np.int64, count=len(entries))
        values = np.fromiter((complex(v) for v in entries.values()), dtype=complex, count=len(entries))
        return cls(sites, values)

    @classmethod
    def from_dense(cls, values) -> "Potential":
        """Entries ``v_1, ..., v_L``; zeros are dropped."""
        values = np.asarray(values, dtype=complex)
        nz = np.flatnonzero(values)
        return cls(nz + 1, values[nz])

    @classmethod
    def from_function(cls, func, C: float, p: float, n_explicit: int) -> "Potential":
        """Infinite-support potential ``v_n = func(n)`` with ``|v_n| <= C n^(-p)`` beyond ``n_explicit``."""
        n = np.arange(1, n_explicit + 1)
        vals = np.asarray(func(n), dtype=complex)
        nz = np.flatnonzero(vals)
        return cls(n[nz], vals[nz], Decay(C, p, n_explicit + 1), func)

    def extend(self, n_explicit: int) -> "Potential":
        """Materialise generator entries up to ``n_explicit``."""
        if self.generator is None or self.decay is None:
            raise ParamError("potential has no generator to extend")
        if n_explicit < self.decay.start:
            return self
        n = np.arange(self.decay.start, n_explicit + 1)
        vals = np.asarray(self.generator(n), dtype=complex)
        nz = np.flatnonzero(vals)
        return Potential(np.concatenate([self.sites, n[nz]]), np.concatenate([self.values, vals[nz]]),
                         Decay(self.decay.C, self.decay.p, n_explicit + 1), self.generator)

    # -- queries ----------------------------------------------------------
    @property
    def is_finite(self) -> bool:
        return self.decay is None

    @property
    def support_bound(self) -> int:
        return int(self.sites[-1]) if self.sites.size else 0

    @property
    def nnz(self) -> int:
        return int(self.sites.size)

    def l1_norm(self) -> float:
        """``sum |v_n|`` over the explicit entries (exact for finite support)."""
        return math.fsum(np.abs(self.values))

    def dense(self, N: int) -> np.ndarray:
        out = np.zeros(N, dtype=complex)
        keep = self.sites <= N
        out[self.sites[keep] - 1] = self.values[keep]
        return out

    def section(self, N: int) -> "Potential":
        keep = self.sites <= N
        return Potential(self.sites[keep], self.values[keep])

    def scaled(self, c) -> "Potential":
        return Potential(self.sites, self.values * c)

    # -- JSON -------------------------------------------------------------
    def to_json_obj(self) -> dict:
        obj = {"entries": [{"n": int(n), "re": float(v.real), "im": float(v.imag)}
                           for n, v in zip(self.sites, self.values)]}
        if self.decay is not None:
            obj["decay"] = {"C": self.decay.C, "p": self.decay.p, "start": self.decay.start}
        return obj

    @classmethod
    def from_json_obj(cls, obj) -> "Potential":
        if not isinstance(obj, dict) or "entries" not in obj:
            raise ParamError("potential JSON must be an object with an 'entries' list")
        extra = set(obj) - {"entries", "decay"}
        if extra:
            raise ParamError(f"unknown potential keys: {sorted(extra)}")
        seen = {}
        for e in obj["entries"]:
            if set(e) - {"n", "re", "im"} or "n" not in e:
                raise ParamError(f"bad potential entry {e!r}")
            n = e["n"]
            if not isinstance(n, int) or isinstance(n, bool) or n < 1:
                raise ParamError(f"site n must be an integer >= 1, got {n!r}")
            if n in seen:
                raise ParamError(f"duplicate site n={n}")
            seen[n] = complex(float(e.get("re", 0.0)), float(e.get("im", 0.0)))
        V = cls.from_entries(seen)
        dec = obj.get("decay")
        if dec is None:
            return V
        if not isinstance(dec, dict) or not {"C", "p"} <= set(dec) or set(dec) - {"C", "p", "start"}:
            raise ParamError("decay must be an object with keys C, p and optional start")
        start = int(dec.get("start", V.support_bound + 1))
        return cls(V.sites, V.values, Decay(float(dec["C"]), float(dec["p"]), start))

    def dumps(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def loads(cls, text: str) -> "Potential":
        return cls.from_json_obj(json.loads(text))

    @classmethod
    def load(cls, path) -> "Potential":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json_obj(json.load(fh))


@dataclass(frozen=True, eq=False)
class TridiagonalMatrix:
    """Top-left ``N x N`` corner of ``J_a + V``.

    Off-diagonal entries all equal ``offdiag`` (``1`` for ``J_a + V``, ``-1``
    after :func:`duality_transform`).
    """

    diagonal: np.ndarray
    offdiag: float = 1.0

    def __post_init__(self):
        d = np.array(self.diagonal, dtype=np.complex128).ravel()
        d.setflags(write=False)
        object.__setattr__(self, "diagonal", d)

    @property
    def N(self) -> int:
        return int(self.diagonal.shape[0])

    def to_dense(self) -> np.ndarray:
        N = self.N
        M = np.diag(self.diagonal.astype(complex))
        idx = np.arange(N - 1)
        M[idx, idx + 1] = self.offdiag
        M[idx + 1, idx] = self.offdiag
        return M

    def to_banded(self) -> np.ndarray:
        """Layout accepted by ``scipy.linalg.solve_banded((1, 1), ...)``."""
        ab = np.zeros((3, self.N), dtype=np.complex128)
        ab[0, 1:] = self.offdiag
        ab[1] = self.diagonal
        ab[2, :-1] = self.offdiag
        return ab

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x)
        y = self.diagonal * x
        y[:-1] += self.offdiag * x[1:]
        y[1:] += self.offdiag * x[:-1]
        return y

    def quadratic_form(self, x) -> complex:
        x = np.asarray(x, dtype=complex)
        return complex(np.vdot(x, self.matvec(x)))

    def shifted(self, c) -> "TridiagonalMatrix":
        return TridiagonalMatrix(self.diagonal + c, self.offdiag)

    def is_real_symmetric(self) -> bool:
        return bool(np.all(self.diagonal.imag == 0.0))


def build_truncation(a, V: Optional[Potential] = None, N: int = 2) -> TridiagonalMatrix:
    """``N x N`` section of ``J_a + V``: diagonal ``(a + v_1, v_2, ..., v_N)``, off-diagonal 1."""
    if N < 2:
        raise SizeError(f"truncation size must be >= 2, got {N}")
    a = RobinCoupling.coerce(a).a
    d = np.zeros(N, dtype=complex) if V is None else V.dense(N)
    d[0] += a
    return TridiagonalMatrix(d, 1.0)


def duality_transform(M: TridiagonalMatrix) -> TridiagonalMatrix:
    """``U M U*`` with ``U = diag(1, -1, 1, ...)``: off-diagonals change sign."""
    return TridiagonalMatrix(M.diagonal, -M.offdiag)
