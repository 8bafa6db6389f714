"""``fieldcalc`` command line.

Exit codes: 0 success, 1 verification failure or degenerate chart,
2 usage or parse error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .builtin_charts import builtin_names, is_builtin
from .geometry import CoordinateChart, DegenerateChartError, load_chart
from .parser import ChartError, ParseError, parse_expression, split_top_level
from .render import render, render_matrix, render_vector
from .vectorops import ScalarField, VectorField, cross, curl, div, dot, grad, laplacian, vector
from .verify import run_checks

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SCALAR_IN = {"grad": 1, "laplacian": 1}
VECTOR_IN = {"div": 1, "curl": 1, "dot": 2, "cross": 2}


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--chart", default="cartesian",
                        help=f"built-in name ({'|'.join(builtin_names())}) or chart file path")
    common.add_argument("--set", action="append", default=[], metavar="NAME=EXPR",
                        help="fix a chart parameter before derivation, e.g. alpha=pi/3")
    common.add_argument("--format", choices=("text", "latex"), default="text")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized checks")

    p = argparse.ArgumentParser(prog="fieldcalc",
                                description="Vector calculus in curvilinear coordinates.")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    m = sub.add_parser("metric", parents=[common], help="print the metric tensor")
    v = m.add_mutually_exclusive_group()
    v.add_argument("--covariant", dest="variance", action="store_const", const="covariant")
    v.add_argument("--contravariant", dest="variance", action="store_const", const="contravariant")
    m.set_defaults(variance="covariant")

    helps = {
        "grad": "gradient of a scalar field",
        "div": "divergence of a vector field",
        "curl": "curl of a vector field",
        "laplacian": "Laplacian of a scalar field",
        "dot": "dot product of two vector fields",
        "cross": "cross product of two vector fields",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, parents=[common], help=text)
        sp.add_argument("fields", nargs="*", metavar="FIELD",
                        help="scalar expression, or three comma-separated physical components; "
                             "a bare name is an opaque function of the coordinates")
    sub.add_parser("verify", parents=[common], help="run the identity and cross-validation suite")
    return p


def _settings(pairs: Sequence[str]) -> dict[str, str]:
    out = {}
    for s in pairs:
        if "=" not in s:
            raise UsageError(f"--set expects NAME=EXPR, got {s!r}")
        k, v = s.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _coords(chart: CoordinateChart) -> str:
    return ", ".join(c.name for c in chart.coordinates)


def _field_expr(text: str, chart: CoordinateChart):
    """Parse one component; bare unknown names become opaque fields."""
    t = text.strip()
    if t.isidentifier() and t not in chart.symbols and t != "pi":
        return chart.field(t)
    try:
        e = parse_expression(t)
    except ParseError as exc:
        raise UsageError(f"cannot parse {t!r}: {exc}") from None
    stray = e.free_symbols - chart.symbols
    if stray:
        raise UsageError(f"unknown symbol {sorted(stray)[0]!r} in {t!r}; chart {chart.name!r} "
                         f"has coordinates: {_coords(chart)}")
    return e


def _scalar_arg(text: str, chart: CoordinateChart) -> ScalarField:
    return ScalarField(_field_expr(text, chart), chart)


def _vector_arg(text: str, chart: CoordinateChart) -> VectorField:
    parts = split_top_level(text)
    if len(parts) == 1 and parts[0].isidentifier() and parts[0] not in chart.symbols:
        # "A" -> A_<coordinate> for each coordinate
        return vector(chart, [f"{parts[0]}_{c.name}" for c in chart.coordinates])
    if len(parts) != 3:
        raise UsageError(f"a vector field needs 3 comma-separated components, got {len(parts)} "
                         f"in {text!r}")
    return VectorField(tuple(_field_expr(p, chart) for p in parts), chart)


def _run_operator(op: str, args, chart: CoordinateChart) -> str:
    want = SCALAR_IN.get(op) or VECTOR_IN[op]
    if len(args.fields) != want:
        raise UsageError(f"{op} takes {want} field argument{'s' if want > 1 else ''}, "
                         f"got {len(args.fields)}")
    if op in SCALAR_IN:
        U = _scalar_arg(args.fields[0], chart)
        result = grad(U) if op == "grad" else laplacian(U)
    else:
        vs = [_vector_arg(f, chart) for f in args.fields]
        result = {"div": div, "curl": curl, "dot": dot, "cross": cross}[op](*vs)
    if isinstance(result, VectorField):
        return render_vector(result.components, args.format)
    return render(result.expr, args.format)


def _run_verify(args, chart: CoordinateChart) -> tuple[str, int]:
    results = run_checks(chart, args.seed)
    lines = [f"chart: {chart.name} (coordinates: {_coords(chart)}"
             + (f"; parameters: {', '.join(p.name for p in chart.parameters)}" if chart.parameters else "")
             + f"), seed {args.seed}"]
    lines += [r.line() for r in results]
    failed = sum(1 for r in results if not r.passed)
    lines.append(f"{len(results) - failed}/{len(results)} checks passed")
    return "\n".join(lines), EXIT_FAIL if failed else EXIT_OK


def _load(ref: str, values: dict[str, str]) -> CoordinateChart:
    if not is_builtin(ref) and not Path(ref).is_file():
        raise UsageError(f"no built-in chart or file named {ref!r} "
                         f"(built-ins: {', '.join(builtin_names())})")
    return load_chart(ref, values)


def main(argv: Sequence[str] | None = None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    out = sys.stdout
    try:
        chart = _load(args.chart, _settings(args.set))
        if args.command == "metric":
            g = chart.covariant_metric() if args.variance == "covariant" else chart.contravariant_metric()
            text, code = render_matrix(g.entries, args.format), EXIT_OK
        elif args.command == "verify":
            text, code = _run_verify(args, chart)
        else:
            text, code = _run_operator(args.command, args, chart), EXIT_OK
    except DegenerateChartError as exc:
        print(f"fieldcalc: error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (UsageError, ChartError, ParseError, ValueError, ArithmeticError, OSError) as exc:
        print(f"fieldcalc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out.write(text + "\n")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
