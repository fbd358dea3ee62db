"""Command-line front end: ``decaybounds {fov,bound,oracle,arnoldi,inexact,reproduce}``."""
from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .bounds import (MU_INVERSE, MU_PHI1, exp_bound, expsqrt_bound, invsqrt_bound,
                     laplace_stieltjes_bound, phi1_bound)
from .krylov import (ExactOperator, PerturbedOperator, arnoldi, apriori_residual_bound,
                     decay_weights, inexact_arnoldi_run, relaxation_schedule, residual_rm)
from .matrices import spectral_norm, toeplitz
from .mmio import mtx_read
from .oracle import column_magnitudes, eval_matfun
from .presets import PRESETS, PresetError, run_preset
from .regions import DiskRegion, EllipseRegion, fit_disk, fit_ellipse, fmt, fov_boundary

OUT_ENV = "DECAYBOUNDS_OUT"
DEFAULT_OUT = "decaybounds-out"


def parse_complex(s: str) -> complex:
    """Accept 1, -2.5, 3+3i, 0.9i, -i (``i`` or ``j`` as imaginary unit)."""
    t = s.strip().replace(" ", "").replace("i", "j")
    if t in ("j", "+j", "-j"):
        t = t.replace("j", "1j")
    try:
        return complex(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {s!r}") from None


def parse_list(s: str) -> list[complex]:
    return [parse_complex(x) for x in s.split(",") if x.strip()]


def parse_range(s: str) -> range:
    """``lo..hi`` inclusive, or a single integer."""
    try:
        if ".." in s:
            lo, hi = s.split("..")
            return range(int(lo), int(hi) + 1)
        return range(int(s), int(s) + 1)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {s!r}, expected LO..HI") from None


def _real(z: complex, what: str) -> float:
    if z.imag != 0:
        raise argparse.ArgumentTypeError(f"{what} must be real")
    return z.real


def _add_matrix_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_argument_group("matrix (Toeplitz stencil or Matrix Market file)")
    g.add_argument("--stencil", type=parse_list,
                   help="comma list from farthest sub- to farthest super-diagonal, e.g. --stencil=-1,4,1")
    g.add_argument("--diag-index", type=int, default=1, help="0-based position of the main diagonal")
    g.add_argument("-n", "--size", type=int, help="matrix dimension")
    g.add_argument("--mtx", help="Matrix Market file")
    p.set_defaults(_matrix_required=required)


def _matrix(args) -> np.ndarray | None:
    if args.mtx:
        return mtx_read(args.mtx)
    if args.stencil:
        if not args.size:
            raise SystemExit("error: --stencil needs -n/--size")
        return toeplitz(args.stencil, args.diag_index, args.size).data
    if args._matrix_required:
        raise SystemExit("error: give --stencil/-n or --mtx")
    return None


def _out(path: str | None):
    if path in (None, "-"):
        return sys.stdout
    return open(path, "w", encoding="utf-8", newline="")


def _emit(path, header, rows) -> None:
    fh = _out(path)
    try:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(fmt(v) if isinstance(v, float) else str(v) for v in r) + "\n")
    finally:
        if fh is not sys.stdout:
            fh.close()


def cmd_fov(args) -> int:
    A = _matrix(args)
    samples = fov_boundary(A, args.angles)
    region = fit_disk(samples, args.safety) if args.fit == "disk" else fit_ellipse(samples, args.safety)
    print(f"# region {region.to_dict()}", file=sys.stderr)
    _emit(args.out, ["theta", "re", "im"], [(s.theta, s.point.real, s.point.imag) for s in samples])
    return 0


def _region(args):
    if args.ellipse is not None:
        vals = parse_list(args.ellipse)
        if len(vals) != 3:
            raise SystemExit("error: --ellipse expects a,b,c")
        return EllipseRegion(vals[2], _real(vals[0], "a"), _real(vals[1], "b"))
    if args.disk is not None:
        vals = parse_list(args.disk)
        if len(vals) != 2:
            raise SystemExit("error: --disk expects c,R")
        return DiskRegion(vals[0], _real(vals[1], "R"))
    A = _matrix(args)
    samples = fov_boundary(A)
    if args.function in ("phi1", "laplace"):
        return fit_disk(samples)
    return fit_ellipse(samples)


def cmd_bound(args) -> int:
    region = _region(args)
    f = args.function
    if f in ("phi1", "laplace") and not isinstance(region, DiskRegion):
        raise SystemExit(f"error: {f} needs a disk region (--disk c,R)")
    if f in ("invsqrt", "expsqrt") and isinstance(region, DiskRegion):
        region = region.as_ellipse()
    try:
        if f == "exp":
            env = exp_bound(region)
        elif f == "invsqrt":
            if args.eps is None:
                raise SystemExit("error: invsqrt needs --eps")
            env = invsqrt_bound(region, args.eps)
        elif f == "expsqrt":
            env = expsqrt_bound(region)
        elif f == "phi1":
            env = phi1_bound(region)
        else:
            mu = {"inverse": MU_INVERSE, "phi1": MU_PHI1}[args.measure]
            rows = []
            for xi in args.xi:
                b = laplace_stieltjes_bound(mu, region, xi) if xi >= 1 else math.inf
                rows.append((xi, b, int(math.isfinite(b))))
            _emit(args.out, ["xi", "bound", "valid"], rows)
            return 0
    except ValueError as exc:
        raise SystemExit(f"error: {exc}") from None
    _emit(args.out, ["xi", "bound", "valid"], [(x, env(x), int(env.valid(x))) for x in args.xi])
    return 0


def cmd_oracle(args) -> int:
    A = _matrix(args)
    F = eval_matfun(args.function, A)
    _emit(args.out, ["row", "abs_entry"], column_magnitudes(F, args.column))
    return 0


def _start(A, args):
    n = A.shape[0]
    return np.ones(n) / math.sqrt(n)


def cmd_arnoldi(args) -> int:
    A = _matrix(args)
    E = fit_ellipse(fov_boundary(A))
    normA = spectral_norm(A)
    dec = arnoldi(ExactOperator(A), _start(A, args), args.m)
    rows = []
    for j in range(1, dec.m + 1):
        bound = apriori_residual_bound(E, normA, j) if args.function == "negexp" else math.nan
        rows.append((j, residual_rm(dec.truncated(j), args.function), bound, 0.0, 0.0))
    _emit(args.out, ["step", "r_m", "bound", "eps_bar", "gap_bound"], rows)
    return 0


def cmd_inexact(args) -> int:
    A = _matrix(args)
    E = fit_ellipse(fov_boundary(A))
    if args.constant:
        eps = np.full(args.m, args.tol / args.m)
        s = np.full(args.m, math.nan)
    else:
        s = decay_weights(args.function, E, args.m, args.eps_m)
        eps = relaxation_schedule(args.tol, args.eps_m, args.m, s).eps_bar
    run = inexact_arnoldi_run(PerturbedOperator(A, args.seed), _start(A, args), args.function, eps)
    h = spectral_norm(A) + args.eps_m
    rows = [(j, float(run.residuals[j - 1]), h * float(s[j - 1]), float(eps[j - 1]),
             float(run.gap_bounds[j - 1])) for j in range(1, run.decomposition.m + 1)]
    _emit(args.out, ["step", "r_m", "bound", "eps_bar", "gap_bound"], rows)
    return 0


def _run_one(name: str, out_root: str, mtx: str | None) -> tuple[str, int, str]:
    try:
        code = run_preset(name, Path(out_root) / name, mtx)
    except PresetError as exc:
        return name, 2, str(exc)
    return name, code, ""


def cmd_reproduce(args) -> int:
    if args.list:
        for name, p in PRESETS.items():
            print(f"{name}\t{p.mode}\t{p.function}")
        return 0
    names = list(PRESETS) if args.preset == ["all"] else args.preset
    for name in names:
        if name not in PRESETS:
            print(f"error: unknown preset {name!r}; available: {', '.join(PRESETS)}", file=sys.stderr)
            return 2
    out_root = args.out or os.environ.get(OUT_ENV, DEFAULT_OUT)
    if args.jobs > 1 and len(names) > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_run_one, names, [out_root] * len(names), [args.mtx] * len(names)))
    else:
        results = [_run_one(n, out_root, args.mtx) for n in names]
    status = 0
    for name, code, msg in results:
        if code == 2:
            print(f"{name}: error: {msg}", file=sys.stderr)
        elif code:
            print(f"{name}: dominance violated, see {Path(out_root) / name / 'run.json'}", file=sys.stderr)
        else:
            print(f"{name}: ok ({Path(out_root) / name})")
        status = max(status, code)
    return status


FUNCTIONS = ["exp", "negexp", "invsqrt", "expnegsqrt", "phi1"]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="decaybounds", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fov", help="sample the field-of-values boundary")
    _add_matrix_args(p)
    p.add_argument("--angles", type=int, default=256)
    p.add_argument("--fit", choices=["ellipse", "disk"], default="ellipse")
    p.add_argument("--safety", type=float, default=1.01)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_fov)

    p = sub.add_parser("bound", help="decay envelope as CSV")
    p.add_argument("--function", required=True, choices=["exp", "invsqrt", "expsqrt", "phi1", "laplace"])
    p.add_argument("--ellipse", help="a,b,c (c may be complex)")
    p.add_argument("--disk", help="c,R")
    _add_matrix_args(p, required=False)
    p.add_argument("--xi", type=parse_range, default=range(1, 31))
    p.add_argument("--eps", type=float, help="distance to the branch point (invsqrt)")
    p.add_argument("--measure", choices=["inverse", "phi1"], default="inverse")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("oracle", help="|f(A)| column by dense evaluation")
    _add_matrix_args(p)
    p.add_argument("--function", required=True, choices=FUNCTIONS)
    p.add_argument("--column", type=int, required=True, help="1-based column")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("arnoldi", help="exact Arnoldi residual history")
    _add_matrix_args(p)
    p.add_argument("--function", choices=FUNCTIONS, default="negexp")
    p.add_argument("-m", type=int, default=20)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_arnoldi)

    p = sub.add_parser("inexact", help="inexact Arnoldi with relaxed matvec accuracy")
    _add_matrix_args(p)
    p.add_argument("--function", choices=["negexp", "exp", "expnegsqrt"], default="negexp")
    p.add_argument("-m", type=int, default=20)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--eps-m", type=float, default=1e-1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--constant", action="store_true", help="use tol/m at every step")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_inexact)

    p = sub.add_parser("reproduce", help="run named presets and write their artifacts")
    p.add_argument("preset", nargs="*", default=["all"], help="preset names or 'all'")
    p.add_argument("--list", action="store_true")
    p.add_argument("--out", help=f"output root (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    p.add_argument("--mtx", help="path to pde225.mtx for fig5-right")
    p.add_argument("-j", "--jobs", type=int, default=1, help="parallel processes")
    p.set_defaults(func=cmd_reproduce)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
