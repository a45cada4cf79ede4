"""Vectorised numpy implementations of the hot kernels.

Every function here has a twin with the same signature in
``_kernels_numba``; the two are checked against each other in the test suite
and timed against each other in ``benchmarks/bench_kernels.py``.
"""
import math

import numpy as np
from scipy.linalg import solve_banded


def sup_modulus(k, kappa, cutoff, max_terms):
    """``max(1, sup_n |1 - kappa k^(2n-1)|)`` for each pair ``(k, kappa)``.

    Iteration stops once ``|kappa k^(2n-1)| < cutoff`` or once
    ``1 + |kappa k^(2n-1)|`` cannot beat the running maximum, which is exact
    because the moduli decrease for ``|k| < 1``.
    """
    k = np.asarray(k, dtype=np.complex128).ravel()
    kappa = np.asarray(kappa, dtype=np.complex128).ravel()
    best = np.ones(k.shape[0])
    bad = ~np.isfinite(kappa)
    best[bad] = np.inf
    idx = np.flatnonzero(~bad)
    c = kappa[idx] * k[idx]
    k2 = k[idx] * k[idx]
    for _ in range(max_terms):
        if idx.size == 0:
            break
        mod = np.abs(c)
        keep = (mod >= cutoff) & (1.0 + mod > best[idx])
        if not keep.all():
            idx, c, k2 = idx[keep], c[keep], k2[keep]
            if idx.size == 0:
                break
        val = np.abs(1.0 - c)
        best[idx] = np.maximum(best[idx], val)
        c = c * k2
    return best


# exact zero pivots (z equal to a leading-minor eigenvalue) are nudged off zero
ZERO_PIVOT = 1e-150 + 0.0j


def tridiag_logdet(diag, offsq, zs):
    """Log-determinant and log-derivative of ``T - z`` for a tridiagonal ``T``.

    ``T`` has diagonal ``diag`` and off-diagonal products ``offsq``
    (``T[i, i+1] * T[i+1, i]``).  Uses the ratio recurrence
    ``r_n = (d_n - z) - offsq / r_{n-1}``, so the result never overflows.
    """
    diag = np.asarray(diag, dtype=np.complex128)
    zs = np.asarray(zs, dtype=np.complex128).ravel()
    r = diag[0] - zs
    r[r == 0] = ZERO_PIVOT
    dr = np.full(zs.shape, -1.0 + 0.0j)
    logd = np.log(r)
    dlog = dr / r
    for i in range(1, diag.shape[0]):
        dr = -1.0 + offsq * dr / (r * r)
        r = diag[i] - zs - offsq / r
        r[r == 0] = ZERO_PIVOT
        logd += np.log(r)
        dlog += dr / r
    return logd, dlog


def tridiag_newton(diag, offsq, z0, tol, max_iter):
    """Newton iteration on ``det(T - z)`` started from each entry of ``z0``."""
    z = np.asarray(z0, dtype=np.complex128).ravel().copy()
    steps = np.full(z.shape, np.inf)
    active = np.arange(z.shape[0])
    for _ in range(max_iter):
        if active.size == 0:
            break
        _, dlog = tridiag_logdet(diag, offsq, z[active])
        step = 1.0 / dlog
        z[active] -= step
        steps[active] = np.abs(step)
        active = active[np.abs(step) > tol * np.maximum(1.0, np.abs(z[active]))]
    return z, steps


START_FREQ = 1.6180339887498949


def tridiag_residuals(diag, off, lams, iters):
    """Residual ``||(T - lam) v|| / ||v||`` after inverse iteration at each ``lam``."""
    diag = np.asarray(diag, dtype=np.complex128)
    n = diag.shape[0]
    ab = np.zeros((3, n), dtype=np.complex128)
    ab[0, 1:] = off
    ab[2, :-1] = off
    tiny = 1e-14 * (np.max(np.abs(diag)) + 2.0 * abs(off))
    out = np.empty(len(lams))
    # Quasi-random start: the constant vector is orthogonal to half of the sine modes.
    start = (1.0 + 0.5 * np.sin(START_FREQ * np.arange(1, n + 1))).astype(np.complex128) / math.sqrt(n)
    for j, lam in enumerate(np.asarray(lams, dtype=np.complex128)):
        ab[1] = diag - lam
        v = start.copy()
        for _ in range(iters):
            try:
                y = solve_banded((1, 1), ab, v, check_finite=False)
            except np.linalg.LinAlgError:
                ab[1] = diag - (lam + tiny)
                y = solve_banded((1, 1), ab, v, check_finite=False)
                ab[1] = diag - lam
            v = y / np.linalg.norm(y)
        res = (diag - lam) * v
        res[:-1] += off * v[1:]
        res[1:] += off * v[:-1]
        out[j] = np.linalg.norm(res)
    return out


_SEGMENT_TABLE = {
    # case -> edge pairs; saddles (5, 10) depend on the cell centre.
    1: ((3, 0),), 2: ((0, 1),), 3: ((3, 1),), 4: ((1, 2),),
    6: ((0, 2),), 7: ((3, 2),), 8: ((2, 3),), 9: ((0, 2),),
    11: ((1, 2),), 12: ((1, 3),), 13: ((0, 1),), 14: ((3, 0),),
}
_SADDLE_TABLE = {
    (5, True): ((0, 1), (2, 3)), (5, False): ((3, 0), (1, 2)),
    (10, True): ((3, 0), (1, 2)), (10, False): ((0, 1), (2, 3)),
}


def _edge_points(f, rows, cols, edge):
    """Edge id and fractional (row, col) of the crossing on one cell edge."""
    R, M = f.shape
    jn = (cols + 1) % M
    if edge == 0:
        fa, fb = f[rows, cols], f[rows, jn]
        t = fa / (fa - fb)
        return rows * M + cols, rows.astype(float), cols + t
    if edge == 1:
        fa, fb = f[rows, jn], f[rows + 1, jn]
        t = fa / (fa - fb)
        return R * M + rows * M + jn, rows + t, jn.astype(float)
    if edge == 2:
        fa, fb = f[rows + 1, cols], f[rows + 1, jn]
        t = fa / (fa - fb)
        return (rows + 1) * M + cols, (rows + 1).astype(float), cols + t
    fa, fb = f[rows, cols], f[rows + 1, cols]
    t = fa / (fa - fb)
    return R * M + rows * M + cols, rows + t, cols.astype(float)


def marching_segments(f):
    """Zero-level segments of ``f`` on a grid periodic in the column index.

    Returns ``(edge_a, edge_b, pts)`` with ``pts[:, 0:2]`` the fractional
    ``(row, col)`` of the first endpoint and ``pts[:, 2:4]`` of the second.
    Segments are emitted in row-major cell order, two per saddle cell.
    Corners with ``f <= 0`` count as inside.
    """
    f = np.ascontiguousarray(f, dtype=np.float64)
    R, M = f.shape
    inside = f <= 0.0
    jn = (np.arange(M) + 1) % M
    case = (inside[:-1, :].astype(np.int64)
            | inside[:-1, jn].astype(np.int64) << 1
            | inside[1:, jn].astype(np.int64) << 2
            | inside[1:, :].astype(np.int64) << 3)
    centre_in = (f[:-1, :] + f[:-1, jn] + f[1:, jn] + f[1:, :]) <= 0.0
    cell_ids, slots, pairs = [], [], []
    for c, table in _SEGMENT_TABLE.items():
        cells = np.flatnonzero(case == c)
        for e in table:
            cell_ids.append(cells)
            slots.append(np.zeros(cells.size, dtype=np.int64))
            pairs.append(np.tile(np.array(e), (cells.size, 1)))
    for c in (5, 10):
        for centre in (True, False):
            cells = np.flatnonzero((case == c) & (centre_in == centre))
            for slot, e in enumerate(_SADDLE_TABLE[(c, centre)]):
                cell_ids.append(cells)
                slots.append(np.full(cells.size, slot, dtype=np.int64))
                pairs.append(np.tile(np.array(e), (cells.size, 1)))
    cell = np.concatenate(cell_ids)
    slot = np.concatenate(slots)
    pair = np.concatenate(pairs).reshape(-1, 2)
    order = np.lexsort((slot, cell))
    cell, pair = cell[order], pair[order]
    rows, cols = np.divmod(cell, M)
    ea = np.empty(cell.size, dtype=np.int64)
    eb = np.empty(cell.size, dtype=np.int64)
    pts = np.empty((cell.size, 4))
    for edge in range(4):
        for side, (ids, out) in enumerate(((pair[:, 0], ea), (pair[:, 1], eb))):
            sel = ids == edge
            eid, pr, pc = _edge_points(f, rows[sel], cols[sel], edge)
            out[sel] = eid
            pts[sel, 2 * side] = pr
            pts[sel, 2 * side + 1] = pc
    return ea, eb, pts


def certificate_sum(n_lo, n_hi, q, block=1 << 20):
    """``sum_{n=n_lo}^{n_hi} n^q (n-1)^q log(n/(n-1))^2`` in fixed-size blocks."""
    partials = []
    start = n_lo
    while start <= n_hi:
        stop = min(n_hi, start + block - 1)
        n = np.arange(start, stop + 1, dtype=np.float64)
        terms = np.exp(q * (np.log(n) + np.log(n - 1.0))) * np.log1p(1.0 / (n - 1.0)) ** 2
        partials.append(float(np.sum(terms)))
        start = stop + 1
    return math.fsum(partials)
