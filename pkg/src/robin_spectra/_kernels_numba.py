"""numba ``@njit`` implementations of the hot kernels.

Signatures and results match ``_kernels_numpy`` (see that module for the
contracts).  Compiled functions are cached on disk.
"""
import math

import numba
import numpy as np
from numba import njit, prange

# Skip the TBB probe: the system TBB is often too old and numba warns about it.
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


@njit(cache=True)
def _sup_one(k, kappa, cutoff, max_terms):
    if not (math.isfinite(kappa.real) and math.isfinite(kappa.imag)):
        return np.inf
    best = 1.0
    c = kappa * k
    k2 = k * k
    for _ in range(max_terms):
        mod = abs(c)
        if mod < cutoff or 1.0 + mod <= best:
            break
        val = abs(1.0 - c)
        if val > best:
            best = val
        c = c * k2
    return best


@njit(parallel=True, cache=True)
def _sup_modulus(k, kappa, cutoff, max_terms):
    out = np.empty(k.shape[0])
    for i in prange(k.shape[0]):
        out[i] = _sup_one(k[i], kappa[i], cutoff, max_terms)
    return out


def sup_modulus(k, kappa, cutoff, max_terms):
    k = np.ascontiguousarray(np.asarray(k, dtype=np.complex128).ravel())
    kappa = np.ascontiguousarray(np.asarray(kappa, dtype=np.complex128).ravel())
    return _sup_modulus(k, kappa, float(cutoff), int(max_terms))


# exact zero pivots (z equal to a leading-minor eigenvalue) are nudged off zero
ZERO_PIVOT = 1e-150 + 0.0j


@njit(cache=True)
def _logdet_one(diag, offsq, z):
    r = diag[0] - z
    if r == 0:
        r = ZERO_PIVOT
    dr = -1.0 + 0.0j
    logd = np.log(r)
    dlog = dr / r
    for i in range(1, diag.shape[0]):
        dr = -1.0 + offsq * dr / (r * r)
        r = diag[i] - z - offsq / r
        if r == 0:
            r = ZERO_PIVOT
        logd += np.log(r)
        dlog += dr / r
    return logd, dlog


@njit(cache=True)
def _tridiag_logdet(diag, offsq, zs):
    logd = np.empty(zs.shape[0], dtype=np.complex128)
    dlog = np.empty(zs.shape[0], dtype=np.complex128)
    for j in range(zs.shape[0]):
        logd[j], dlog[j] = _logdet_one(diag, offsq, zs[j])
    return logd, dlog


def tridiag_logdet(diag, offsq, zs):
    diag = np.ascontiguousarray(diag, dtype=np.complex128)
    zs = np.ascontiguousarray(np.asarray(zs, dtype=np.complex128).ravel())
    return _tridiag_logdet(diag, complex(offsq), zs)


@njit(cache=True)
def _tridiag_newton(diag, offsq, z0, tol, max_iter):
    z = z0.copy()
    steps = np.full(z.shape[0], np.inf)
    for j in range(z.shape[0]):
        zj = z[j]
        for _ in range(max_iter):
            _, dlog = _logdet_one(diag, offsq, zj)
            step = 1.0 / dlog
            zj -= step
            steps[j] = abs(step)
            if abs(step) <= tol * max(1.0, abs(zj)):
                break
        z[j] = zj
    return z, steps


def tridiag_newton(diag, offsq, z0, tol, max_iter):
    diag = np.ascontiguousarray(diag, dtype=np.complex128)
    z0 = np.ascontiguousarray(np.asarray(z0, dtype=np.complex128).ravel())
    return _tridiag_newton(diag, complex(offsq), z0, float(tol), int(max_iter))


@njit(cache=True)
def _gtsv(dl, d, du, b, tiny):
    # In-place tridiagonal solve with partial pivoting (LAPACK xGTSV layout).
    # dl doubles as storage for the second superdiagonal fill-in.  Exactly zero
    # pivots become ``tiny``, as inverse iteration at an exact eigenvalue needs.
    n = d.shape[0]
    for k in range(n - 1):
        if abs(d[k]) >= abs(dl[k]):
            mult = dl[k] / d[k]
            d[k + 1] -= mult * du[k]
            b[k + 1] -= mult * b[k]
            dl[k] = 0.0
        else:
            mult = d[k] / dl[k]
            d[k] = dl[k]
            temp = d[k + 1]
            d[k + 1] = du[k] - mult * temp
            if k < n - 2:
                dl[k] = du[k + 1]
                du[k + 1] = -mult * dl[k]
            else:
                dl[k] = 0.0
            du[k] = temp
            temp = b[k]
            b[k] = b[k + 1]
            b[k + 1] = temp - mult * b[k + 1]
    for k in range(n):
        if d[k] == 0.0:
            d[k] = tiny
    b[n - 1] /= d[n - 1]
    if n > 1:
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2]
    for k in range(n - 3, -1, -1):
        b[k] = (b[k] - du[k] * b[k + 1] - dl[k] * b[k + 2]) / d[k]


_START_FREQ = 1.6180339887498949


@njit(cache=True)
def _tridiag_residuals(diag, off, lams, iters, tiny):
    n = diag.shape[0]
    out = np.empty(lams.shape[0])
    dl = np.empty(max(n - 1, 1), dtype=np.complex128)
    du = np.empty(max(n - 1, 1), dtype=np.complex128)
    d = np.empty(n, dtype=np.complex128)
    v = np.empty(n, dtype=np.complex128)
    for j in range(lams.shape[0]):
        lam = lams[j]
        for i in range(n):
            v[i] = (1.0 + 0.5 * math.sin(_START_FREQ * (i + 1))) / math.sqrt(n)
        for _ in range(iters):
            for i in range(n - 1):
                dl[i] = off
                du[i] = off
            for i in range(n):
                d[i] = diag[i] - lam
                if d[i] == 0.0:
                    d[i] = tiny
            _gtsv(dl, d, du, v, tiny)
            nrm = 0.0
            for i in range(n):
                nrm += v[i].real ** 2 + v[i].imag ** 2
            nrm = math.sqrt(nrm)
            for i in range(n):
                v[i] /= nrm
        acc = 0.0
        for i in range(n):
            r = (diag[i] - lam) * v[i]
            if i > 0:
                r += off * v[i - 1]
            if i < n - 1:
                r += off * v[i + 1]
            acc += r.real ** 2 + r.imag ** 2
        out[j] = math.sqrt(acc)
    return out


def tridiag_residuals(diag, off, lams, iters):
    diag = np.ascontiguousarray(diag, dtype=np.complex128)
    lams = np.ascontiguousarray(np.asarray(lams, dtype=np.complex128).ravel())
    tiny = 1e-14 * (np.max(np.abs(diag)) + 2.0 * abs(off))
    return _tridiag_residuals(diag, complex(off), lams, int(iters), complex(tiny))


@njit(cache=True)
def _edge(f, i, j, edge, M, R):
    jn = (j + 1) % M
    if edge == 0:
        fa = f[i, j]
        fb = f[i, jn]
        return i * M + j, float(i), j + fa / (fa - fb)
    if edge == 1:
        fa = f[i, jn]
        fb = f[i + 1, jn]
        return R * M + i * M + jn, i + fa / (fa - fb), float(jn)
    if edge == 2:
        fa = f[i + 1, j]
        fb = f[i + 1, jn]
        return (i + 1) * M + j, float(i + 1), j + fa / (fa - fb)
    fa = f[i, j]
    fb = f[i + 1, j]
    return R * M + i * M + j, i + fa / (fa - fb), float(j)


@njit(cache=True)
def _cell_pairs(case, centre_in):
    # Up to two (edge_a, edge_b) pairs per cell; -1 marks an unused slot.
    if case == 1 or case == 14:
        return 3, 0, -1, -1
    if case == 2 or case == 13:
        return 0, 1, -1, -1
    if case == 3:
        return 3, 1, -1, -1
    if case == 12:
        return 1, 3, -1, -1
    if case == 4 or case == 11:
        return 1, 2, -1, -1
    if case == 6 or case == 9:
        return 0, 2, -1, -1
    if case == 7:
        return 3, 2, -1, -1
    if case == 8:
        return 2, 3, -1, -1
    if case == 5:
        if centre_in:
            return 0, 1, 2, 3
        return 3, 0, 1, 2
    if case == 10:
        if centre_in:
            return 3, 0, 1, 2
        return 0, 1, 2, 3
    return -1, -1, -1, -1


@njit(cache=True)
def _marching_segments(f):
    R, M = f.shape
    count = 0
    for i in range(R - 1):
        for j in range(M):
            jn = (j + 1) % M
            case = ((f[i, j] <= 0.0) * 1 + (f[i, jn] <= 0.0) * 2
                    + (f[i + 1, jn] <= 0.0) * 4 + (f[i + 1, j] <= 0.0) * 8)
            if case == 5 or case == 10:
                count += 2
            elif case != 0 and case != 15:
                count += 1
    ea = np.empty(count, dtype=np.int64)
    eb = np.empty(count, dtype=np.int64)
    pts = np.empty((count, 4))
    s = 0
    for i in range(R - 1):
        for j in range(M):
            jn = (j + 1) % M
            case = ((f[i, j] <= 0.0) * 1 + (f[i, jn] <= 0.0) * 2
                    + (f[i + 1, jn] <= 0.0) * 4 + (f[i + 1, j] <= 0.0) * 8)
            if case == 0 or case == 15:
                continue
            centre_in = (f[i, j] + f[i, jn] + f[i + 1, jn] + f[i + 1, j]) <= 0.0
            a0, b0, a1, b1 = _cell_pairs(case, centre_in)
            for a, b in ((a0, b0), (a1, b1)):
                if a < 0:
                    continue
                ida, ra, ca = _edge(f, i, j, a, M, R)
                idb, rb, cb = _edge(f, i, j, b, M, R)
                ea[s] = ida
                eb[s] = idb
                pts[s, 0] = ra
                pts[s, 1] = ca
                pts[s, 2] = rb
                pts[s, 3] = cb
                s += 1
    return ea, eb, pts


def marching_segments(f):
    return _marching_segments(np.ascontiguousarray(f, dtype=np.float64))


@njit(cache=True)
def _certificate_sum(n_lo, n_hi, q, block):
    # Fixed-size blocks summed separately, then combined pairwise.
    nblocks = (n_hi - n_lo) // block + 1
    partial = np.zeros(nblocks)
    for b in range(nblocks):
        start = n_lo + b * block
        stop = min(n_hi, start + block - 1)
        acc = 0.0
        for n in range(start, stop + 1):
            x = float(n)
            lg = math.log1p(1.0 / (x - 1.0))
            acc += math.exp(q * (math.log(x) + math.log(x - 1.0))) * lg * lg
        partial[b] = acc
    while partial.shape[0] > 1:
        half = (partial.shape[0] + 1) // 2
        nxt = np.zeros(half)
        for i in range(partial.shape[0]):
            nxt[i // 2] += partial[i]
        partial = nxt
    return partial[0]


def certificate_sum(n_lo, n_hi, q, block=1 << 16):
    if n_hi < n_lo:
        return 0.0
    return float(_certificate_sum(int(n_lo), int(n_hi), float(q), int(block)))
