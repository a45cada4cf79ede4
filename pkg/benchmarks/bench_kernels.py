"""Time every hot kernel under both backends and check that they agree.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Numba timings exclude the first (compiling) call, which is reported separately.
"""
import argparse
import json
import math
import time

import numpy as np

from robin_spectra import kernels
from robin_spectra.enclosure import GridField, PolarGrid
from robin_spectra.lattice import Potential, build_truncation


def _cases():
    rng = np.random.default_rng(0)

    k = np.sqrt(rng.uniform(0.0, 0.999, 200_000)) * np.exp(2j * np.pi * rng.uniform(size=200_000))
    kappa = (k - 0.5) / (1.0 - 0.5 * k)
    yield "sup_modulus (2e5 points)", "sup_modulus", (k, kappa, 1e-14, 50_000_000)

    M = build_truncation(0.3, Potential.from_dense(0.2 * rng.standard_normal(40)), 2000)
    zs = 2.4 * np.exp(2j * np.pi * np.arange(4096) / 4096)
    yield "tridiag_logdet (N=2000, 4096 z)", "tridiag_logdet", (M.diagonal, 1.0 + 0j, zs)
    yield "tridiag_newton (N=2000, 64 starts)", "tridiag_newton", (M.diagonal, 1.0 + 0j, zs[::64], 1e-14, 100)

    lams = np.linspace(-1.9, 1.9, 200) + 0j
    yield "tridiag_residuals (N=2000, 200 shifts)", "tridiag_residuals", (M.diagonal, 1.0, lams, 3)

    f = GridField.compute(0.0, PolarGrid.square(800)).indicator(1.0)
    yield "marching_segments (800x800)", "marching_segments", (f,)

    yield "certificate_sum (n <= 1e7)", "certificate_sum", (1001, 10_000_000, 0.5)


def _agree(a, b):
    if isinstance(a, tuple):
        return all(_agree(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        return False
    if a.dtype.kind in "iu":
        return bool(np.array_equal(a, b))
    scale = max(1.0, float(np.max(np.abs(a))) if a.size else 1.0)
    return bool(np.allclose(a, b, rtol=1e-9, atol=1e-12 * scale))


def _time(fn, args, repeat):
    best = math.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--json", help="also write the results here")
    args = p.parse_args(argv)

    nb = kernels.implementation("numba")
    npy = kernels.implementation("numpy")
    rows = []
    print(f"{'kernel':42s} {'compile':>9s} {'numba':>10s} {'numpy':>10s} {'speedup':>8s}  agree")
    for label, name, kargs in _cases():
        t0 = time.perf_counter()
        getattr(nb, name)(*kargs)
        compile_s = time.perf_counter() - t0
        t_nb, out_nb = _time(getattr(nb, name), kargs, args.repeat)
        t_np, out_np = _time(getattr(npy, name), kargs, max(1, args.repeat // 2))
        ok = _agree(out_nb, out_np)
        rows.append({"kernel": label, "compile_s": compile_s, "numba_s": t_nb, "numpy_s": t_np,
                     "speedup": t_np / t_nb, "agree": ok})
        print(f"{label:42s} {compile_s:9.3f} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:8.1f}  {ok}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
