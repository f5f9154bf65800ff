"""
Command-line front end.

Every subcommand writes one JSON report to stdout (or ``--out``) and
returns an exit code derived from the report alone:

    0  the property holds, or the experiment matches its expected verdict
    1  the property fails; the report carries the witness
    2  inconsistency (an experiment contradicts its expected verdict) or an
       inconclusive result
    3  usage error: bad flags, unreadable or malformed input

Example:
    $ totpos check --order 3 --strict matrix.json
    $ totpos preserver --alpha 0.5 --dim 3
    $ totpos whitney --approximate fc --n 4 --d 2 --points="1,-1;2,1"
    $ totpos pff obstruct --family M --alpha 1 --power 2
    $ totpos pfseq check --coeffs 1,2,1 --order 4
    $ totpos jain --n 5 --theta pi/10 --alpha 2.5
"""

from __future__ import annotations

import argparse
import sys
from collections.abc import Callable, Sequence
from fractions import Fraction
from pathlib import Path
from typing import Any, NoReturn

import numpy as np
import sympy

from totpos._completion import embed_sym_2x2, embed_tp_2x2
from totpos._matrix import RationalMatrix, check, fekete_tp, hankel_check
from totpos._polya import (
    GaussDensity,
    LambdaD,
    MAlpha,
    OneSidedN,
    PffFamily,
    PfSequence,
    Phi,
    PowerVerdict,
    cosine_jain,
    discretize_pff,
    eval_pff,
    generating_poly_pf_check,
    pf_sequence_check,
    pff_toeplitz_check,
    power_obstruction,
    transform_report,
)
from totpos._preserver import FamilyId, report_to_dict, test_preserver
from totpos._serialization import (
    dump_json,
    matrix_to_dict,
    parse_matrix_text,
    verdict_to_dict,
)
from totpos._transform import Power, parse_transform
from totpos._types import KernelGrid, NotTotallyPositiveError, Verdict
from totpos._whitney import ConvolutionPlan, approximate, lift_kernel

__all__ = [
    "main",
    "build_parser",
    "EXIT_OK",
    "EXIT_FAIL",
    "EXIT_INCONSISTENT",
    "EXIT_USAGE",
]

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INCONSISTENT = 2
EXIT_USAGE = 3

Report = tuple[dict[str, Any], int]


class UsageError(Exception):
    """Bad command line or malformed input."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{self.prog}: {message}")


def _version() -> str:
    from totpos import __version__

    return __version__


def parse_real(text: str) -> sympy.Expr:
    """Parse "3/4", "0.5", "pi/10" or "sqrt(2)"; rationals stay exact."""
    try:
        value = sympy.sympify(text.strip(), rational=("." not in text))
    except (sympy.SympifyError, SyntaxError, TypeError) as e:
        raise UsageError(f"Not a real number: {text!r}") from e
    if not value.is_real or not value.is_number:
        raise UsageError(f"Not a real number: {text!r}")
    return value if value.is_Rational else sympy.Float(value.evalf(30), 30)


def _real_list(text: str) -> list[sympy.Expr]:
    return [parse_real(part) for part in text.split(",") if part.strip()]


def _read_matrix(source: str) -> RationalMatrix:
    text = source
    name = "<inline>"
    if not source.lstrip().startswith(("{", "[")):
        path = Path(source)
        try:
            text = path.read_text()
        except OSError as e:
            raise UsageError(f"Cannot read {source}: {e.strerror}") from None
        name = str(path)
    try:
        return parse_matrix_text(text, name)
    except (ValueError, TypeError) as e:
        raise UsageError(str(e)) from None


def _verdict_exit(verdict: Verdict) -> int:
    return EXIT_OK if verdict.passed else EXIT_FAIL


def _progress(args: argparse.Namespace, message: str) -> None:
    if getattr(args, "verbose", False):
        print(message, file=sys.stderr)


def _refused(command: str, error: NotTotallyPositiveError) -> Report:
    doc = {
        "command": command,
        "error": str(error),
        "input": verdict_to_dict(error.verdict),
    }
    return doc, EXIT_FAIL


# Matrix commands


def cmd_check(args: argparse.Namespace) -> Report:
    matrix = _read_matrix(args.input)
    verdict = check(matrix, args.order, args.strict, args.tol)
    _progress(args, f"examined {verdict.examined} minors")
    doc = {
        "command": "check",
        "shape": list(matrix.shape),
        "kind": matrix.kind.value,
        "strict": args.strict,
        "verdict": verdict_to_dict(verdict),
    }
    return doc, _verdict_exit(verdict)


def cmd_fekete(args: argparse.Namespace) -> Report:
    matrix = _read_matrix(args.input)
    verdict = fekete_tp(matrix, args.tol)
    _progress(args, f"examined {verdict.examined} contiguous minors")
    doc = {
        "command": "fekete",
        "shape": list(matrix.shape),
        "verdict": verdict_to_dict(verdict),
    }
    return doc, _verdict_exit(verdict)


def cmd_hankel(args: argparse.Namespace) -> Report:
    moments = [part.strip() for part in args.moments.split(",") if part.strip()]
    verdict = hankel_check(moments, args.strict, args.tol)
    doc = {
        "command": "hankel",
        "moments": moments,
        "strict": args.strict,
        "verdict": verdict_to_dict(verdict),
    }
    return doc, _verdict_exit(verdict)


def _exact_or_float(value: sympy.Expr) -> Fraction | float:
    if value.is_Rational:
        return Fraction(int(value.p), int(value.q))
    return float(value)


def _grid_override(text: str) -> tuple[FamilyId, list[tuple[Any, ...]]]:
    """Parse FAMILY=x,y;x,y into a family grid; C3= is the empty point."""
    name, sep, body = text.partition("=")
    if not sep:
        raise UsageError(f"--grid expects FAMILY=x,y;x,y, got {text!r}")
    try:
        family = FamilyId(name.strip().upper())
    except ValueError:
        raise UsageError(f"Unknown family {name!r}") from None
    points = [
        tuple(_exact_or_float(v) for v in _real_list(point))
        for point in body.split(";")
    ]
    return family, points


def cmd_preserver(args: argparse.Namespace) -> Report:
    if (args.transform is None) == (args.alpha is None):
        raise UsageError("preserver needs exactly one of --transform or --alpha")
    if args.transform is not None:
        transform = parse_transform(args.transform)
    else:
        transform = Power(args.alpha, args.c)
    grids = dict(_grid_override(text) for text in args.grid or ())
    report = test_preserver(
        transform,
        args.dim,
        args.symmetric,
        args.strict,
        grids,
        samples=args.samples,
        seed=args.seed,
    )
    _progress(args, f"searched {report.points} grid points")
    doc = {"command": "preserver", **report_to_dict(report)}
    return doc, EXIT_OK if report.consistent else EXIT_INCONSISTENT


def cmd_whitney(args: argparse.Namespace) -> Report:
    if args.approximate is not None:
        return _whitney_approximate(args)
    if args.input is None:
        raise UsageError("whitney needs a matrix input unless --approximate is given")
    matrix = _read_matrix(args.input)
    m, n = matrix.shape
    if args.grid is None:
        xs: Sequence[float] = [float(i) for i in range(m)]
        ys: Sequence[float] = [float(j) for j in range(n)]
    else:
        coords = [float(v) for v in _real_list(args.grid)]
        if len(coords) != max(m, n):
            raise UsageError(
                f"--grid needs {max(m, n)} coordinates, got {len(coords)}"
            )
        xs, ys = coords[:m], coords[:n]
    grid = KernelGrid(xs, ys, matrix.as_float().to_numpy())
    plan = ConvolutionPlan(args.kappa, tuple(xs), tuple(ys))
    try:
        result = lift_kernel(grid, args.order, plan, args.tol)
    except NotTotallyPositiveError as e:
        return _refused("whitney", e)
    _progress(args, f"rank {result.rank}, {result.iterations} convolution rounds")
    doc = {"command": "whitney", "kappa": plan.kappa, **result.to_dict()}
    return doc, _verdict_exit(result.verdict)


def _kernel_function(text: str) -> tuple[sympy.Expr, Callable[[float, float], float]]:
    """A kernel K(x, y) given as a sympy expression in x and y."""
    x, y = sympy.symbols("x y", real=True)
    try:
        expr = sympy.sympify(text, locals={"x": x, "y": y})
    except (sympy.SympifyError, SyntaxError, TypeError) as e:
        raise UsageError(f"Not a kernel expression: {text!r}") from e
    if not expr.free_symbols <= {x, y}:
        raise UsageError(f"Kernel may only use x and y, got {text!r}")
    fn = sympy.lambdify((x, y), expr, "numpy")
    return expr, lambda a, b: float(fn(a, b))


def _point_list(text: str) -> list[tuple[float, float]]:
    points = []
    for part in text.split(";"):
        coords = [float(v) for v in _real_list(part)]
        if len(coords) != 2:
            raise UsageError(f"--points expects x,y;x,y, got {part!r}")
        points.append((coords[0], coords[1]))
    return points


def _whitney_approximate(args: argparse.Namespace) -> Report:
    if args.input is not None:
        raise UsageError("--approximate takes --kernel, not a matrix input")
    if args.points is None:
        raise UsageError("--approximate needs --points")
    expr, kernel = _kernel_function(args.kernel)
    report = approximate(
        kernel, args.order, args.n, _point_list(args.points), args.approximate, args.d
    )
    _progress(args, f"rank {report.rank}, {report.iterations} convolution rounds")
    if args.csv is not None:
        Path(args.csv).write_text(report.to_csv())
        _progress(args, f"wrote {args.csv}")
    doc = {
        "command": "whitney approximate",
        "kernel": str(expr),
        "csv": args.csv,
        **report.to_dict(),
    }
    return doc, _verdict_exit(report.verdict)


def cmd_embed2x2(args: argparse.Namespace) -> Report:
    matrix = _read_matrix(args.input)
    m, n = args.shape
    try:
        emb = embed_tp_2x2(matrix, m, n, tuple(args.rows), tuple(args.cols))
    except NotTotallyPositiveError as e:
        return _refused("embed2x2", e)
    verdict = emb.certify()
    doc = {
        "command": "embed2x2",
        "embedding": emb.to_dict(),
        "matrix": matrix_to_dict(emb.matrix()),
        "certificate": verdict_to_dict(verdict),
    }
    return doc, _verdict_exit(verdict)


def cmd_embedsym(args: argparse.Namespace) -> Report:
    matrix = _read_matrix(args.input)
    x1, x2 = args.place
    try:
        emb = embed_sym_2x2(matrix, x1, x2)
    except NotTotallyPositiveError as e:
        return _refused("embedsym", e)
    points = (
        [x1, x2] if args.points is None else [float(v) for v in _real_list(args.points)]
    )
    verdict = emb.certify(points)
    doc = {
        "command": "embedsym",
        "embedding": emb.to_dict(),
        "points": points,
        "certificate": verdict_to_dict(verdict),
    }
    return doc, _verdict_exit(verdict)


# Polya commands


def family_from_args(args: argparse.Namespace) -> PffFamily:
    """Build the --family selected on the command line."""
    name = args.family
    if name == "lambda":
        return LambdaD(parse_real(args.d))
    if name == "phi":
        return Phi()
    if name == "gauss":
        return GaussDensity(float(parse_real(args.gamma)))
    if name == "M":
        return MAlpha(parse_real(args.alpha))
    if name == "N":
        a = _real_list(args.a)
        if len(a) != 3:
            raise UsageError(f"--a needs three exponents, got {len(a)}")
        c = None if args.coeffs is None else tuple(_real_list(args.coeffs))
        return OneSidedN((a[0], a[1], a[2]), c)  # type: ignore[arg-type]
    raise UsageError(f"Unknown family {name!r}")


def cmd_pff(args: argparse.Namespace) -> Report:
    family = family_from_args(args)
    action = args.action
    if action == "laplace":
        return {"command": "pff laplace", **transform_report(family)}, EXIT_OK
    if action == "obstruct":
        result = power_obstruction(family, args.power)
        code = {
            PowerVerdict.COMPATIBLE: EXIT_OK,
            PowerVerdict.OBSTRUCTED: EXIT_FAIL,
            PowerVerdict.INCONCLUSIVE: EXIT_INCONSISTENT,
        }[result.verdict]
        return {"command": "pff obstruct", **result.to_dict()}, code
    if action == "eval":
        xs = [float(v) for v in _real_list(args.x)]
        values = [eval_pff(family, x) for x in xs]
        doc = {
            "command": "pff eval",
            "family": family.to_dict(),
            "x": xs,
            "values": values,
        }
        return doc, EXIT_OK
    if action == "discretize":
        lo, hi = args.window
        seq = discretize_pff(family, args.N, (lo, hi), args.power)
        verdict = pf_sequence_check(seq, args.order)
        doc = {
            "command": "pff discretize",
            "family": family.to_dict(),
            "N": args.N,
            "power": args.power,
            "sequence": seq.to_dict(),
            "verdict": verdict_to_dict(verdict),
        }
        return doc, _verdict_exit(verdict)
    # toeplitz: sampled TN check on a random grid
    rng = np.random.default_rng(args.seed)
    points = np.sort(rng.uniform(-args.spread, args.spread, size=args.points))
    verdict = pff_toeplitz_check(family, points.tolist(), args.order)
    doc = {
        "command": "pff toeplitz",
        "family": family.to_dict(),
        "seed": args.seed,
        "points": points.tolist(),
        "verdict": verdict_to_dict(verdict),
    }
    return doc, _verdict_exit(verdict)


def cmd_pfseq(args: argparse.Namespace) -> Report:
    coeffs = [part.strip() for part in args.coeffs.split(",") if part.strip()]
    if args.action == "poly":
        cert = generating_poly_pf_check(coeffs)
        doc = {"command": "pfseq poly", "coeffs": coeffs, **cert.to_dict()}
        return doc, EXIT_OK if cert.passed else EXIT_FAIL
    seq = PfSequence(args.offset, tuple(coeffs))
    verdict = pf_sequence_check(seq, args.order, args.window, args.tol)
    _progress(args, f"examined {verdict.examined} minors")
    doc = {
        "command": "pfseq check",
        "sequence": seq.to_dict(),
        "verdict": verdict_to_dict(verdict),
    }
    return doc, _verdict_exit(verdict)


def cmd_jain(args: argparse.Namespace) -> Report:
    theta = float(parse_real(args.theta))
    alpha = float(parse_real(args.alpha))
    result = cosine_jain(args.n, theta, alpha)
    doc = {"command": "jain", **result.to_dict()}
    if result.psd != result.expected_psd:
        return doc, EXIT_INCONSISTENT
    return doc, EXIT_OK if result.psd else EXIT_FAIL


# Parser


def add_common_args(parser: argparse.ArgumentParser) -> None:
    """Flags shared by every subcommand: --out, --verbose."""
    parser.add_argument("--out", "-o", help="Write the JSON report to this path")
    parser.add_argument(
        "--verbose", "-v", action="store_true", help="Progress lines on stderr"
    )


def _add_order_args(parser: argparse.ArgumentParser, default: int | None) -> None:
    parser.add_argument("--order", "-p", type=int, default=default, help="Order p")
    parser.add_argument("--tol", type=float, help="Hadamard-relative tolerance")


def _add_family_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--family", required=True, choices=["lambda", "phi", "gauss", "M", "N"]
    )
    parser.add_argument("--alpha", default="1", help="M_alpha parameter")
    parser.add_argument("--d", default="1", help="lambda_d value at the origin")
    parser.add_argument("--gamma", default="1", help="Gaussian density parameter")
    parser.add_argument("--a", default="1,2,4", help="OneSidedN exponents a1,a2,a3")
    parser.add_argument("--coeffs", help="OneSidedN coefficients c1,c2,c3")


def _pair(kind: Callable[[str], Any]) -> dict[str, Any]:
    return {"nargs": 2, "type": kind}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="totpos", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", help="TN_p / TP_p verdict of a matrix")
    p.add_argument("input", help="JSON/CSV path or inline JSON")
    _add_order_args(p, None)
    p.add_argument("--strict", action="store_true", help="Test TP instead of TN")
    add_common_args(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("fekete", help="TP certificate from contiguous minors")
    p.add_argument("input")
    p.add_argument("--tol", type=float)
    add_common_args(p)
    p.set_defaults(func=cmd_fekete)

    p = sub.add_parser("hankel", help="TN/TP of a Hankel moment matrix")
    p.add_argument("moments", help="Comma-separated moments s_0,...,s_{2n-2}")
    p.add_argument("--strict", action="store_true")
    p.add_argument("--tol", type=float)
    add_common_args(p)
    p.set_defaults(func=cmd_hankel)

    p = sub.add_parser("preserver", help="Run an entrywise transform experiment")
    p.add_argument("--transform", help="power:alpha[:c], const:c, step:c, atom:c")
    p.add_argument("--alpha", type=str, help="Shorthand for power:alpha")
    p.add_argument("--c", type=str, default="1")
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--symmetric", action="store_true")
    p.add_argument("--strict", action="store_true")
    p.add_argument(
        "--grid",
        action="append",
        help="Replace a family grid: FAMILY=x,y;x,y (repeatable)",
    )
    p.add_argument("--samples", type=int, default=0, help="Random points per family")
    p.add_argument("--seed", type=int, default=0, help="Seed for --samples")
    add_common_args(p)
    p.set_defaults(func=cmd_preserver)

    p = sub.add_parser("whitney", help="Lift a TN_p sampled kernel to TP_p")
    p.add_argument("input", nargs="?")
    _add_order_args(p, 2)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--grid", help="Comma-separated coordinates for rows/cols")
    p.add_argument(
        "--approximate", choices=["fc", "cc"], help="Finite-grid scheme for --kernel"
    )
    p.add_argument("--kernel", default="1", help="K(x, y) as an expression in x, y")
    p.add_argument("--n", type=int, default=4, help="Resolution of the scheme")
    p.add_argument("--d", type=int, help="Rows 1..d of the finite factor (fc)")
    p.add_argument("--points", help="Continuity points x,y;x,y")
    p.add_argument("--csv", help="Also write the per-point CSV to this path")
    add_common_args(p)
    p.set_defaults(func=cmd_whitney)

    p = sub.add_parser("embed2x2", help="Embed a TP 2x2 matrix in a larger TP one")
    p.add_argument("input")
    p.add_argument("--shape", default=(2, 2), **_pair(int))
    p.add_argument("--rows", default=(0, 1), **_pair(int))
    p.add_argument("--cols", default=(0, 1), **_pair(int))
    add_common_args(p)
    p.set_defaults(func=cmd_embed2x2)

    p = sub.add_parser("embedsym", help="Embed a symmetric TP 2x2 in a Hankel kernel")
    p.add_argument("input")
    p.add_argument("--place", default=(0.0, 1.0), **_pair(float))
    p.add_argument("--points", help="Comma-separated sample points to certify")
    add_common_args(p)
    p.set_defaults(func=cmd_embedsym)

    p = sub.add_parser("pff", help="Polya frequency functions")
    p.add_argument(
        "action", choices=["laplace", "obstruct", "eval", "discretize", "toeplitz"]
    )
    _add_family_args(p)
    p.add_argument("--power", type=int, default=1)
    p.add_argument("--x", default="0", help="Comma-separated evaluation points")
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--window", default=(-8, 8), **_pair(int))
    p.add_argument("--order", "-p", type=int, default=3)
    p.add_argument("--points", type=int, default=5)
    p.add_argument("--spread", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=0)
    add_common_args(p)
    p.set_defaults(func=cmd_pff)

    p = sub.add_parser("pfseq", help="Polya frequency sequences")
    p.add_argument("action", choices=["check", "poly"])
    p.add_argument("--coeffs", required=True, help="Comma-separated terms")
    p.add_argument("--offset", type=int, default=0)
    p.add_argument("--window", type=int)
    _add_order_args(p, 4)
    add_common_args(p)
    p.set_defaults(func=cmd_pfseq)

    p = sub.add_parser("jain", help="Hadamard powers of (cos((i-j) theta))")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--theta", required=True)
    p.add_argument("--alpha", required=True)
    add_common_args(p)
    p.set_defaults(func=cmd_jain)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run the CLI; returns the exit code."""
    try:
        args = build_parser().parse_args(argv)
        doc, code = args.func(args)
    except UsageError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, TypeError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE
    text = dump_json(doc, args.out)
    if args.out is None:
        print(text)
    else:
        _progress(args, f"wrote {args.out}")
    return code


if __name__ == "__main__":
    sys.exit(main())
