"""
Command-line interface.

::

    mlsorth basis    --points FILE [--order K | --stop square] [--out PATH]
    mlsorth stencil  --points FILE --x0 X --beta B [--out PATH]
    mlsorth estimate --points FILE --x0 X --beta B (--values FILE | --function F)
    mlsorth study conv   --dim D --function F --beta B [--seed S] [--out DIR]
    mlsorth study detail [--seed S] [--sigma S] [--out PATH]

Exit codes: 0 success, 1 usage, 2 I/O, 3 degenerate input.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from . import harness
from .basis import (
    DEFAULT_RANK_TOL,
    SelectionConfig,
    format_basis_dump,
    parse_multiindex,
)
from .fit import completeness_messages, estimate_derivative, format_stencil_csv, stencil
from .orthogonalize import build_orthonormal_basis, format_coefficients_csv
from .pointset import EmptyPointSetError, PointSet, parse_points

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_DEGENERATE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.replace(",", " ").split()])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _beta(text: str):
    try:
        return parse_multiindex(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _add_selection(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--order", type=int, metavar="K",
                   help="test every monomial up to degree K")
    g.add_argument("--stop", choices=["square"],
                   help="accept as many monomials as points (default)")
    p.add_argument("--rank-tol", type=float, default=DEFAULT_RANK_TOL, metavar="T",
                   help="relative residual below which a monomial is rejected")


def _add_points(p: argparse.ArgumentParser) -> None:
    p.add_argument("--points", required=True, metavar="FILE", help="point file")
    p.add_argument("--dim", type=int, metavar="D",
                   help="dimension; a D+1'th column is then read as weights")
    p.add_argument("--out", metavar="PATH", help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mlsorth", description="Orthogonal-polynomial moving least squares.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("basis", help="select monomials and print the orthonormal basis")
    _add_points(b)
    _add_selection(b)
    b.add_argument("--center", type=_floats, metavar="X",
                   help="centre of the normalising frame (default origin)")

    s = sub.add_parser("stencil", help="interpolation or derivative weights at a point")
    _add_points(s)
    _add_selection(s)
    s.add_argument("--x0", type=_floats, metavar="X", help="evaluation point (default origin)")
    s.add_argument("--beta", type=_beta, metavar="B", help="derivative, e.g. 1,0")

    e = sub.add_parser("estimate", help="estimate a derivative from sampled values")
    _add_points(e)
    _add_selection(e)
    e.add_argument("--x0", type=_floats, metavar="X")
    e.add_argument("--beta", type=_beta, metavar="B")
    src = e.add_mutually_exclusive_group(required=True)
    src.add_argument("--values", metavar="FILE", help="one function value per point")
    src.add_argument("--function", choices=["f1", "f2", "f3"],
                     help="sample a built-in test function at the points")
    e.add_argument("--neighbors", type=int, metavar="N",
                   help="use only the N points nearest x0")

    st = sub.add_parser("study", help="run a convergence or single-configuration study")
    ss = st.add_subparsers(dest="study", required=True, parser_class=_Parser)

    c = ss.add_parser("conv", help="random-point convergence study")
    c.add_argument("--dim", type=int, default=2, choices=[2, 3])
    c.add_argument("--function", default="f1", choices=["f1", "f2", "f3"])
    c.add_argument("--beta", type=_beta, metavar="B")
    c.add_argument("--orders", type=_ints, default=harness.DEFAULT_ORDERS, metavar="K,..")
    c.add_argument("--n-points", type=_ints, default=harness.DEFAULT_NPOINTS, metavar="N,..")
    c.add_argument("--sigmas", type=_floats, metavar="S,..",
                   help="contraction factors (default 2^-1 .. 2^-5)")
    c.add_argument("--trials", type=int, default=32)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--rank-tol", type=float, default=harness.STUDY_RANK_TOL, metavar="T")
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--out", metavar="DIR",
                   help="write summary.csv and rows.csv into DIR")

    d = ss.add_parser("detail", help="second derivatives of f2 on one configuration")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--sigma", type=float, default=2.0**-3)
    d.add_argument("--n-max", type=int, default=20)
    d.add_argument("--rank-tol", type=float, default=harness.STUDY_RANK_TOL, metavar="T")
    d.add_argument("--out", metavar="PATH", help="CSV output (default: table only)")
    return p


# ----------------------------------------------------------------------------
# helpers


def _read_pointset(path: str, dim: int | None) -> PointSet:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        return parse_points(text, dim)
    except EmptyPointSetError:
        raise
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise InputError(f"cannot write {out}: {exc.strerror or exc}") from None


def _selection(args) -> SelectionConfig:
    if not args.rank_tol > 0:
        raise UsageError("--rank-tol must be positive")
    if args.order is not None:
        if args.order < 0:
            raise UsageError("--order must be >= 0")
        return SelectionConfig.order(args.order, rank_tolerance=args.rank_tol)
    return SelectionConfig.square(rank_tolerance=args.rank_tol)


def _vector(v, dim: int, name: str) -> np.ndarray:
    if v is None:
        return np.zeros(dim)
    if v.shape[0] != dim:
        raise UsageError(f"{name} has {v.shape[0]} components, points are {dim}-dimensional")
    return v


def _multiindex(beta, dim: int):
    if beta is None:
        return (0,) * dim
    if len(beta) != dim:
        raise UsageError(f"--beta has {len(beta)} components, points are {dim}-dimensional")
    return beta


# ----------------------------------------------------------------------------
# subcommands


def cmd_basis(args) -> int:
    ps = _read_pointset(args.points, args.dim)
    center = None if args.center is None else _vector(args.center, ps.dim, "--center")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        ob = build_orthonormal_basis(ps, _selection(args), center=center)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    dump = format_basis_dump(ob.basis)
    coeffs = format_coefficients_csv(ob)
    if args.out is None:
        sys.stdout.write(ob.basis.describe() + "\n\n" + dump + "\n" + coeffs)
    else:
        out = Path(args.out)
        _emit(ob.basis.describe() + "\n\n" + dump, str(out))
        _emit(coeffs, str(out.with_name(out.stem + "_R.csv")))
    return EXIT_OK


def cmd_stencil(args) -> int:
    ps = _read_pointset(args.points, args.dim)
    x0 = _vector(args.x0, ps.dim, "--x0")
    beta = _multiindex(args.beta, ps.dim)
    ob = build_orthonormal_basis(ps, _selection(args), center=x0)
    for m in completeness_messages(ob.basis, sum(beta)):
        print(f"warning: {m}", file=sys.stderr)
    if ob.basis.diagnostic:
        print(f"warning: {ob.basis.diagnostic}", file=sys.stderr)
    _emit(format_stencil_csv(stencil(ob, x0, beta)), args.out)
    return EXIT_OK


def _read_values(path: str, n: int) -> np.ndarray:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    vals = []
    for line in text.splitlines():
        s = line.strip()
        if s and not s.startswith("#"):
            try:
                vals.append(float(s))
            except ValueError:
                raise InputError(f"{path}: not a number: {s!r}") from None
    if len(vals) != n:
        raise InputError(f"{path}: {len(vals)} values for {n} points")
    return np.array(vals)


def cmd_estimate(args) -> int:
    ps = _read_pointset(args.points, args.dim)
    x0 = _vector(args.x0, ps.dim, "--x0")
    beta = _multiindex(args.beta, ps.dim)
    if args.neighbors is not None and not 1 <= args.neighbors <= ps.n:
        raise UsageError(f"--neighbors must be between 1 and {ps.n}")
    if args.values is not None:
        f = _read_values(args.values, ps.n)
    else:
        f = harness.TestFunction(args.function, ps.dim)(ps.points)
    with warnings.catch_warnings(record=True):
        warnings.simplefilter("always")
        est = estimate_derivative(ps, f, x0, beta, _selection(args), args.neighbors)
    for m in est.diagnostics.messages:
        print(f"warning: {m}", file=sys.stderr)
    lines = [f"{est.value:.17g}"]
    if args.function is not None and sum(beta) <= 2:
        exact = harness.TestFunction(args.function, ps.dim).derivative(x0, beta)
        lines.append(f"# exact={exact:.17g} error={abs(est.value - exact):.17g}")
    lines.append(
        f"# N={est.diagnostics.n_points} accepted={len(est.diagnostics.accepted)} "
        f"rejected={est.diagnostics.n_rejected}"
    )
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_study_conv(args) -> int:
    beta = args.beta if args.beta is not None else (1,) + (0,) * (args.dim - 1)
    try:
        cfg = harness.StudyConfig(
            dim=args.dim,
            function=args.function,
            beta=beta,
            orders=args.orders,
            n_points=args.n_points,
            sigmas=tuple(args.sigmas) if args.sigmas is not None else harness.DEFAULT_SIGMAS,
            trials=args.trials,
            seed=args.seed,
            rank_tolerance=args.rank_tol,
            workers=args.workers,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report = harness.run_convergence_study(cfg)
    if cfg.low_statistics:
        print(f"LOW-STATISTICS: only {cfg.trials} trial(s)", file=sys.stderr)
    if report.failures:
        print(f"warning: {len(report.failures)} fit(s) failed and were excluded",
              file=sys.stderr)
    if args.out is not None:
        out = Path(args.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise InputError(f"cannot create {out}: {exc.strerror or exc}") from None
        _emit(harness.report_summary_csv(report), str(out / "summary.csv"))
        _emit(harness.report_rows_csv(report), str(out / "rows.csv"))
    sys.stdout.write(harness.report_header(cfg) + "\n" + harness.format_summary_table(report))
    return EXIT_OK


def cmd_study_detail(args) -> int:
    if not 0 < args.sigma <= 1:
        raise UsageError("--sigma must lie in (0, 1]")
    if args.n_max < 6:
        raise UsageError("--n-max must be at least 6")
    report = harness.run_detail_study(
        seed=args.seed, sigma=args.sigma, n_max=args.n_max, rank_tolerance=args.rank_tol
    )
    if args.out is not None:
        _emit(harness.detail_csv(report), args.out)
    lines = [f"# seed={report.seed} sigma={report.sigma:g}",
             f"{'N':>3}{'rejected':>10}{'log2|e_xx|':>12}{'log2|e_xy|':>12}"
             f"{'log2|e_yy|':>12}  quartics"]
    for r in report.rows:
        q = " ".join("".join(str(a) for a in alpha) for alpha in r.quartics)
        errs = "".join(f"{r.log2_error(b):12.1f}" for b in harness.SECOND_DERIVATIVES_2D)
        lines.append(f"{r.n:>3}{r.n_rejected:>10}{errs}  {q}")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


_COMMANDS = {
    "basis": cmd_basis,
    "stencil": cmd_stencil,
    "estimate": cmd_estimate,
    ("study", "conv"): cmd_study_conv,
    ("study", "detail"): cmd_study_detail,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    key = ("study", args.study) if args.command == "study" else args.command
    try:
        return _COMMANDS[key](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"mlsorth: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"mlsorth: {exc}", file=sys.stderr)
        return EXIT_IO
    except (EmptyPointSetError, np.linalg.LinAlgError, ZeroDivisionError, ValueError) as exc:
        print(f"mlsorth: degenerate input: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
