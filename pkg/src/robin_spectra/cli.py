"""Command-line interface: ``robin-spectra <command> ...``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
Reports go to stdout as JSON (or CSV for tables) unless ``--output`` is given.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import enclosure, hardy, resolvent, spectra, stability
from .errors import ConfigError, NotOnBoundary, NumericalError, ParamError, RealTarget
from .io import (complex_tag, dumps, enclosure_svg, fmt, parse_complex, parse_list,
                 polylines_csv, table_csv, write_text)
from .lattice import Potential, RobinCoupling, build_truncation

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0
FIGURE_QS = (0.5, 1.0, 2.0)
FIGURES = (
    ("figure1_dirichlet", 0.0, "Dirichlet (a = 0)"),
    ("figure2_neumann", 1.0, "Neumann (a = 1)"),
    ("figure3_a0p5", 0.5, "a = 1/2"),
    ("figure4_a2", 2.0, "a = 2"),
    ("figure5_golden", 1j * GOLDEN, "a = i(1 + sqrt 5)/2"),
)


def _complex_arg(text):
    try:
        return parse_complex(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _floats(text):
    try:
        vals = parse_list(text, float)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _ints(text):
    try:
        return parse_list(text, int)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _emit(text: str, output):
    if output:
        write_text(output, text)
    else:
        sys.stdout.write(text)


def _load_potential(path):
    if path is None:
        return Potential.zero()
    try:
        return Potential.load(path)
    except OSError as exc:
        raise ParamError(f"cannot read potential file: {exc}") from exc
    except ValueError as exc:
        raise ParamError(f"invalid potential JSON: {exc}") from exc


def _cplx(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


# -- commands ---------------------------------------------------------------------------

def cmd_enclosure(args):
    curves = enclosure.trace_boundaries(args.a, args.Q, args.grid, args.delta)
    out = Path(args.out)
    tag = complex_tag(args.a)
    files = []
    for c in curves:
        stem = out / f"enclosure_a{tag}_Q{complex_tag(c.Q)}"
        files.append(str(write_text(stem.with_suffix(".csv"), polylines_csv(c))))
        files.append(str(write_text(stem.with_suffix(".svg"),
                                    enclosure_svg([c], f"a = {fmt(c.a.real)}{'' if c.a.imag == 0 else ' + ' + fmt(c.a.imag) + 'i'}, Q = {fmt(c.Q)}"))))
    report = {"a": _cplx(args.a), "grid": curves[0].grid,
              "curves": [{"Q": c.Q, "polylines": c.n_polylines, "closed": int(sum(c.closed)),
                          "vertices": int(c.vertices().size)} for c in curves],
              "features": [{"kind": k, **_cplx(z)} for k, z in curves[0].features],
              "files": files}
    if args.real_near_misses:
        report["real_boundary"] = [
            {"Q": Q, "points": [{"x": p.x, "g_a": p.g, "n_best": p.n_best, "attained": p.attained,
                                 "eigen_residual": p.eigen_residual}
                                for p in enclosure.real_boundary_near_misses(args.a, Q, args.delta)]}
            for Q in args.Q]
    _emit(dumps(report), args.output)


def cmd_figures(args):
    out = Path(args.out)
    chosen = FIGURES if args.all or not args.only else [f for f in FIGURES if f[0] in args.only]
    manifest = []
    for name, a, title in chosen:
        curves = enclosure.trace_boundaries(a, args.Q, args.grid, args.delta)
        path = write_text(out / f"{name}.svg", enclosure_svg(curves, f"Optimal spectral enclosures, {title}"))
        manifest.append({"figure": name, "a": _cplx(a), "file": str(path),
                         "polylines": {fmt(c.Q): c.n_polylines for c in curves},
                         "red_dot": bool(abs(a) > 1)})
    _emit(dumps({"figures": manifest}), args.output)


def cmd_green(args):
    ev = resolvent.green_evaluator(args.a)
    G = ev.entry(args.z, args.m, args.n)
    report = {"a": _cplx(args.a), "z": _cplx(args.z), "m": args.m, "n": args.n,
              "G": _cplx(G), "sign_convention": ev.sign_convention,
              "g_a": resolvent.g_a(args.z, args.a), "gamma_a": resolvent.gamma_a(args.z, args.a)}
    if args.verify:
        from scipy.linalg import solve_banded
        M = build_truncation(args.a, None, args.verify)
        rhs = np.zeros(args.verify, dtype=complex)
        rhs[args.n - 1] = 1.0
        col = solve_banded((1, 1), M.shifted(-args.z).to_banded(), rhs)
        report["oracle"] = {"N": args.verify, "G": _cplx(col[args.m - 1]),
                            "abs_diff": float(abs(col[args.m - 1] - G))}
    _emit(dumps(report), args.output)


def _weight_kind(args):
    if args.kind == "classical":
        return hardy.HardyWeight.classical()
    if args.kind == "robin":
        return hardy.HardyWeight.robin(args.q, args.a)
    return hardy.HardyWeight.power(args.q)


def cmd_hardy(args):
    if args.hardy_cmd == "weights":
        w = _weight_kind(args)
        n = np.arange(1, args.n_max + 1)
        vals = w.values(n)
        _emit(table_csv(["n", "w"], [(int(k), float(v)) for k, v in zip(n, vals)]), args.output)
    elif args.hardy_cmd == "certify":
        rows = []
        for N in args.N:
            S = hardy.optimality_certificate(args.q, N)
            rows.append({"N": N, "S": S, "bound": hardy.certificate_bound(N),
                         "within_bound": bool(S <= hardy.certificate_bound(N))})
        _emit(dumps({"q": args.q, "certificates": rows}), args.output)
    elif args.hardy_cmd == "identity":
        rng = np.random.default_rng(args.seed)
        g = hardy.GeneratorSequence.power(args.q)
        worst = 0.0
        for _ in range(args.samples):
            L = int(rng.integers(1, args.support + 1))
            u = rng.standard_normal(L) + 1j * rng.standard_normal(L)
            worst = max(worst, hardy.identity_residual(u, g))
        _emit(dumps({"q": args.q, "samples": args.samples, "support": args.support,
                     "seed": args.seed, "max_residual": worst}), args.output)
    elif args.hardy_cmd == "tail-quotient":
        rows = [{"n": n, "N": N, "min_quotient": hardy.tail_rayleigh_minimum(args.q, n, N)}
                for n in args.n for N in args.N if N > n]
        _emit(dumps({"q": args.q, "results": rows}), args.output)
    elif args.hardy_cmd == "critical-neumann":
        rows = []
        for N in args.N:
            form, ref = hardy.neumann_criticality_demo(N)
            rows.append({"N": N, "form": form, "one_over_N": ref, "abs_diff": abs(form - ref)})
        _emit(dumps({"results": rows}), args.output)


def cmd_stability(args):
    V = _load_potential(args.potential)
    v = stability.verdict(args.a, V, args.N)
    report = v.to_json_obj()
    report["a"] = float(complex(args.a).real)
    report["l1_norm"] = V.l1_norm()
    if args.check_n:
        M = build_truncation(args.a, V, args.check_n)
        rep = spectra.eigenvalues_dense(M)
        report["truncation"] = {"N": args.check_n, "margin": args.margin,
                                "outside": [_cplx(z) for z in rep.outside(args.margin)]}
    _emit(dumps(report), args.output)


def cmd_eigen(args):
    V = _load_potential(args.potential)
    M = build_truncation(args.a, V, args.N)
    rep = spectra.eigenvalues_dense(M)
    out = rep.outside(args.margin)
    report = rep.to_json_obj()
    if args.outside_only:
        report.pop("eigenvalues")
    report.update({"a": _cplx(args.a), "margin": args.margin,
                   "outside": [_cplx(z) for z in out]})
    if args.count:
        report["outside_count_argument_principle"] = spectra.count_outside_band(M, args.margin)
    _emit(dumps(report), args.output)


def cmd_witness(args):
    z = complex(args.z)
    if z.imag == 0:
        raise RealTarget("optimality is only asserted for non-real boundary points")
    F = enclosure.enclosure_indicator(z, args.a, args.Q)
    zb = z if abs(F) <= enclosure.BOUNDARY_TOL else enclosure.boundary_point_on_ray(args.a, args.Q, z)
    if zb.imag == 0:
        raise NotOnBoundary("the boundary point on this ray is real")
    w = enclosure.construct_optimality_witness(args.a, args.Q, zb)
    exact = spectra.rank_one_eigenvalues_exact(args.a, w.omega, w.n)
    nearest = min(exact, key=lambda e: abs(e - zb)) if exact else None
    dist = spectra.verify_in_truncation(args.a, Potential.point(w.n, w.omega), [zb], args.N)[0]
    report = {"a": _cplx(args.a), "Q": args.Q, "z_input": _cplx(z), "z": _cplx(zb),
              "projected": bool(zb != z), "n": w.n, "omega": _cplx(w.omega), "abs_omega": abs(w.omega),
              "characteristic_residual": w.residual(),
              "exact_eigenvalues": [_cplx(e) for e in exact],
              "exact_distance": None if nearest is None else abs(nearest - zb),
              "truncation": {"N": args.N, "distance": float(dist)}}
    _emit(dumps(report), args.output)


# -- parser -------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="robin-spectra", description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=0, help="seed for randomised sampling (default 0)")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, a_default="0"):
        sp.add_argument("--a", type=_complex_arg, default=parse_complex(a_default),
                        help="Robin coupling, e.g. 0, 2 or 0+1.618i")
        sp.add_argument("--output", "-o", help="write the report here instead of stdout")

    sp = sub.add_parser("enclosure", help="trace enclosure boundaries; CSV and SVG per Q")
    common(sp)
    sp.add_argument("--q", "--Q", dest="Q", type=_floats, default=list(FIGURE_QS), help="budgets, comma separated")
    sp.add_argument("--grid", type=int, default=enclosure.DEFAULT_GRID)
    sp.add_argument("--delta", type=float, default=enclosure.DEFAULT_DELTA)
    sp.add_argument("--out", default=".", help="directory for CSV/SVG files")
    sp.add_argument("--real-near-misses", action="store_true",
                    help="also probe real boundary points off the band (evidence only)")
    sp.set_defaults(func=cmd_enclosure)

    sp = sub.add_parser("figures", help="regenerate the enclosure figures as SVG")
    sp.add_argument("--all", action="store_true", help="all five figures (default)")
    sp.add_argument("--only", nargs="*", default=None, help="figure names to render")
    sp.add_argument("--q", "--Q", dest="Q", type=_floats, default=list(FIGURE_QS))
    sp.add_argument("--grid", type=int, default=enclosure.DEFAULT_GRID)
    sp.add_argument("--delta", type=float, default=enclosure.DEFAULT_DELTA)
    sp.add_argument("--out", default="figures")
    sp.add_argument("--output", "-o")
    sp.set_defaults(func=cmd_figures)

    sp = sub.add_parser("green", help="Green kernel entry with g_a and gamma_a")
    common(sp)
    sp.add_argument("--z", type=_complex_arg, required=True)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--verify", type=int, default=0, metavar="N", help="compare with a linear solve on N sites")
    sp.set_defaults(func=cmd_green)

    sp = sub.add_parser("hardy", help="Hardy weights, certificates and identities")
    hs = sp.add_subparsers(dest="hardy_cmd", required=True)
    h = hs.add_parser("weights")
    h.add_argument("--kind", choices=["power", "classical", "robin"], default="power")
    h.add_argument("--q", type=float, default=0.5)
    h.add_argument("--a", type=float, default=0.0)
    h.add_argument("--n-max", type=int, default=100)
    h.add_argument("--output", "-o")
    h = hs.add_parser("certify")
    h.add_argument("--q", type=float, default=0.5)
    h.add_argument("--N", type=_ints, default=[100, 1000, 10000])
    h.add_argument("--output", "-o")
    h = hs.add_parser("identity")
    h.add_argument("--q", type=float, default=0.5)
    h.add_argument("--samples", type=int, default=100)
    h.add_argument("--support", type=int, default=50)
    h.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    h.add_argument("--output", "-o")
    h = hs.add_parser("tail-quotient", help="smallest Rayleigh quotient of the weight on sites n..N")
    h.add_argument("--q", type=float, default=0.5)
    h.add_argument("--n", type=_ints, default=[1, 5])
    h.add_argument("--N", type=_ints, default=[100, 1000, 10000])
    h.add_argument("--output", "-o")
    h = hs.add_parser("critical-neumann")
    h.add_argument("--N", type=_ints, default=[1, 10, 1000])
    h.add_argument("--output", "-o")
    sp.set_defaults(func=cmd_hardy)

    sp = sub.add_parser("stability", help="stability verdict for J_a + V")
    common(sp)
    sp.add_argument("--potential", help="potential JSON file")
    sp.add_argument("--N", type=int, default=None, help="section size for the power iteration")
    sp.add_argument("--check-n", type=int, default=0, help="also list section eigenvalues off the band")
    sp.add_argument("--margin", type=float, default=0.05)
    sp.set_defaults(func=cmd_stability)

    sp = sub.add_parser("eigen", help="eigenvalues of a finite section")
    common(sp)
    sp.add_argument("--potential")
    sp.add_argument("--N", type=int, default=400)
    sp.add_argument("--margin", type=float, default=0.05)
    sp.add_argument("--count", action="store_true", help="cross-check with the argument principle")
    sp.add_argument("--outside-only", action="store_true", help="omit the full eigenvalue list")
    sp.set_defaults(func=cmd_eigen)

    sp = sub.add_parser("witness", help="rank-one potential realising a boundary point")
    common(sp)
    sp.add_argument("--Q", "--q", dest="Q", type=float, required=True)
    sp.add_argument("--z", type=_complex_arg, required=True)
    sp.add_argument("--N", type=int, default=600)
    sp.set_defaults(func=cmd_witness)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if hasattr(args, "a") and not isinstance(args.a, float):
            RobinCoupling.coerce(args.a)
        args.func(args)
    except ConfigError as exc:
        print(f"robin-spectra: error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"robin-spectra: numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
