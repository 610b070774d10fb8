"""Command line front end: ``eisglm <command> ...``.

Exit codes: 0 success, 1 failed check or computation, 2 usage error.
All numeric output is CSV with 17 significant digits.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
import warnings

import numpy as np

from .errors import EisGlmError
from .fileformat import read_tableau, save_tableau
from .harness import PAPER_SLOPES, VDP_TF, VDP_U0, convergence_study, default_dts, vdp_problem
from .registry import get_method, registry
from .stability import check_a_stability, fmt, scan_region
from .sspharness import lambda_grid, ssp_csv, ssp_study
from .tableau import (
    eis_residuals,
    rank_one_defect,
    unnormalized_tau,
    compute_tau,
    verify_eis,
    verify_order,
    zero_stability_eigenvalues,
    ORDER_TOL,
    STRUCTURE_TOL,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _resolve(args):
    if (args.method is None) == (args.file is None):
        raise UsageError("give exactly one of METHOD or --file")
    if args.file is not None:
        try:
            return read_tableau(args.file)
        except OSError as exc:
            raise UsageError(f"cannot read {args.file}: {exc.strerror}") from None
    try:
        return get_method(args.method)
    except KeyError:
        raise UsageError(f"unknown method {args.method!r}; see 'eisglm list'") from None


def _floats(text, what):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{what} must be a comma separated list of numbers") from None
    if not vals:
        raise UsageError(f"{what} is empty")
    return vals


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def cmd_list(args) -> int:
    rows = [
        (t.name, t.s, t.p, t.P, t.kind.value, t.family.value,
         "" if t.ssp_coefficient is None else fmt(t.ssp_coefficient))
        for t in registry()
    ]
    _emit(_csv(rows, ["name", "s", "p", "P", "kind", "family", "ssp_coefficient"]), None)
    return EXIT_OK


def cmd_verify(args) -> int:
    tab = _resolve(args)
    failed = []
    one = np.ones(tab.s)
    print(f"method {tab.name}  s={tab.s} p={tab.p} P={tab.P} kind={tab.kind.value} family={tab.family.value}")
    print("abscissas " + " ".join(fmt(x) for x in tab.c))
    cons = float(np.max(np.abs(tab.D @ one - one)))
    rank = rank_one_defect(tab.D)
    print(f"consistency {fmt(cons)}")
    print(f"rank_one {fmt(rank)}")
    if cons > STRUCTURE_TOL:
        failed.append("consistency")
    if rank > STRUCTURE_TOL:
        failed.append("rank_one")
    for j in range(tab.p + 3):
        r = float(np.max(np.abs(compute_tau(tab, j))))
        print(f"tau_{j} {fmt(r)}")
    try:
        verify_order(tab)
    except EisGlmError:
        failed.append("order")
    eis = eis_residuals(tab)
    for key, val in eis.as_dict().items():
        print(f"{key} {fmt(val)}")
    try:
        verify_eis(tab)
    except EisGlmError as exc:
        failed.extend(getattr(exc, "failed", ["eis"]))
    if tab.stored_tau is not None:
        gap = float(np.max(np.abs(unnormalized_tau(tab, tab.p + 1) - tab.stored_tau)))
        print(f"stored_tau {fmt(gap)}")
        if gap > ORDER_TOL:
            failed.append("stored_tau")
    eig = zero_stability_eigenvalues(tab)
    print("D_eigenvalues " + " ".join(fmt(abs(e)) for e in eig))
    if failed:
        print("FAIL " + ",".join(failed))
        return EXIT_FAIL
    print("PASS")
    return EXIT_OK


def cmd_converge(args) -> int:
    tab = _resolve(args)
    dts = _floats(args.dts, "--dts") if args.dts else default_dts(args.tf)
    if any(d <= 0 for d in dts):
        raise UsageError("--dts must be positive")
    problem = vdp_problem(analytic_jacobians=not args.fd_jacobians)
    res = convergence_study(tab, problem, args.tf, dts, m=args.m, u0=VDP_U0)
    rows = [(tab.name, dt, raw, post) for dt, raw, post in res.rows]
    text = _csv(rows, ["method", "dt", "raw_error", "post_error"])
    paper = PAPER_SLOPES.get(tab.name, (math.nan, math.nan))
    slope_post = math.nan if res.slope_post is None else res.slope_post
    text += "\n" + _csv(
        [(tab.name, res.slope_raw, slope_post, float(paper[0]), float(paper[1]))],
        ["method", "slope_raw", "slope_post", "paper_raw", "paper_post"],
    )
    _emit(text, args.out)
    return EXIT_OK


def cmd_stability(args) -> int:
    tab = _resolve(args)
    kw = {}
    if args.window:
        w = _floats(args.window, "--window")
        if len(w) != 4 or w[0] >= w[1] or w[2] >= w[3]:
            raise UsageError("--window is re_min,re_max,im_min,im_max")
        kw = {"re_range": w[:2], "im_range": w[2:]}
    if args.n < 2:
        raise UsageError("--n must be at least 2")
    _emit(scan_region(tab, nx=args.n, ny=args.n, **kw).to_csv(), args.out)
    return EXIT_OK


def cmd_astable(args) -> int:
    tab = _resolve(args)
    rep = check_a_stability(tab)
    print(f"method {rep.method}")
    print("sampled evidence only, not a proof")
    print(f"samples {rep.n_samples}")
    print(f"max_rho {fmt(rep.max_rho)}")
    print(f"violations {len(rep.violations)}")
    for z, rho in rep.violations[:20]:
        print(f"  z={fmt(z.real)}{z.imag:+.17g}j rho={fmt(rho)}")
    print(f"left_half_plane_poles {len(rep.poles)}")
    for z in rep.poles:
        print(f"  z={fmt(z.real)}{z.imag:+.17g}j")
    print("PASS" if rep.passed else "FAIL")
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_ssp(args) -> int:
    tab = _resolve(args)
    if args.lambdas:
        lams = _floats(args.lambdas, "--lambdas")
    else:
        lams = list(lambda_grid(tab.ssp_coefficient or 1.0))
    if any(not lam > 0 for lam in lams):
        raise UsageError("CFL numbers must be positive")
    if args.steps < 1 or args.n < 4:
        raise UsageError("need --steps >= 1 and --n >= 4")
    if not tab.family.is_explicit:
        raise UsageError(f"{tab.name} is implicit; the advection study needs an explicit method")
    _emit(ssp_csv(ssp_study(tab, lams, N=args.n, steps=args.steps, m=args.m)), args.out)
    return EXIT_OK


def cmd_dump(args) -> int:
    _emit(save_tableau(_resolve(args)), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="eisglm", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def with_tableau(p):
        p.add_argument("method", nargs="?", help="registry method name")
        p.add_argument("--file", help="tableau coefficient file")
        return p

    sub.add_parser("list", help="list built-in methods").set_defaults(func=cmd_list)
    with_tableau(sub.add_parser("verify", help="order and EIS checks")).set_defaults(func=cmd_verify)

    p = with_tableau(sub.add_parser("converge", help="Van der Pol convergence study"))
    p.add_argument("--tf", type=float, default=VDP_TF)
    p.add_argument("--m", type=int, default=None, help="post-processing window (steps)")
    p.add_argument("--dts", help="comma separated step sizes (each must divide tf)")
    p.add_argument("--fd-jacobians", action="store_true",
                   help="use finite-difference Jacobians in implicit solves")
    p.add_argument("--out")
    p.set_defaults(func=cmd_converge)

    p = with_tableau(sub.add_parser("stability", help="spectral radius on a grid (CSV)"))
    p.add_argument("--window", help="re_min,re_max,im_min,im_max (default [-s,s]^2)")
    p.add_argument("--n", type=int, default=401)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stability)

    with_tableau(sub.add_parser("astable", help="sampled A-stability report")).set_defaults(func=cmd_astable)

    p = with_tableau(sub.add_parser("ssp", help="total variation study on advection"))
    p.add_argument("--lambdas", help="comma separated CFL numbers (default 40 up to the SSP coefficient)")
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ssp)

    p = with_tableau(sub.add_parser("tableau-dump", help="write a method in the coefficient file format"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_dump)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return args.func(args)
    except UsageError as exc:
        print(f"eisglm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EisGlmError as exc:
        print(f"eisglm: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
