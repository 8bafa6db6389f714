"""Verification suite run by ``fieldcalc verify``.

Each check returns a :class:`CheckResult`. Zero checks go through
:func:`is_zero`; ``Unknown`` is a failure and the residual is reported.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from .geometry import CoordinateChart, DegenerateChartError, det3
from .oracle import cross_validate
from .parser import parse_expression
from .render import render
from .symkernel.calculus import differentiate
from .symkernel.expr import ONE, Expr, add, div, mul, sqrt, sub
from .symkernel.zero import ZeroResult, is_zero
from .vectorops import ScalarField, VectorField, curl, div as vdiv, grad, laplacian, scalar, vector

FD_TOL = 1e-6
FD_POINTS = 20


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    skipped: bool = False
    residuals: list[str] = field(default_factory=list)

    def line(self) -> str:
        tag = "SKIP" if self.skipped else ("PASS" if self.passed else "FAIL")
        out = f"{tag}  {self.name}"
        if self.detail:
            out += f"  ({self.detail})"
        for r in self.residuals:
            out += f"\n      residual: {r}"
        return out


def zero_check(name: str, exprs: Sequence[Expr], chart: CoordinateChart, seed: int) -> CheckResult:
    """Pass iff every expression is ProvedZero."""
    bad = []
    states = []
    for k, e in enumerate(exprs):
        z = is_zero(e, seed, chart.assumptions)
        states.append(str(z))
        if z is not ZeroResult.PROVED_ZERO:
            bad.append(f"[{k + 1}] {z}: {render(chart.simplify(e))}")
    detail = ", ".join(sorted(set(states))) if len(exprs) > 1 else states[0]
    return CheckResult(name, not bad, detail, residuals=bad)


# ---------------------------------------------------------------------------
# textbook orthogonal forms written directly from the Lamé coefficients
# ---------------------------------------------------------------------------


def lame_grad(chart: CoordinateChart, U: Expr) -> list[Expr]:
    H = chart.lame_coefficients()
    return [div(differentiate(U, q), H[i]) for i, q in enumerate(chart.coordinates)]


def lame_div(chart: CoordinateChart, A: Sequence[Expr]) -> Expr:
    H = chart.lame_coefficients()
    vol = mul(*H)
    q = chart.coordinates
    return div(add(*(differentiate(div(mul(vol, A[i]), H[i]), q[i]) for i in range(3))), vol)


def lame_curl(chart: CoordinateChart, A: Sequence[Expr]) -> list[Expr]:
    """Right-handed textbook curl, times the chart orientation."""
    H = chart.lame_coefficients()
    q = chart.coordinates
    s = chart.orientation()
    out = []
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        c = sub(differentiate(mul(H[k], A[k]), q[j]), differentiate(mul(H[j], A[j]), q[k]))
        out.append(mul(s, div(c, mul(H[j], H[k]))))
    return out


def opaque_fields(chart: CoordinateChart) -> tuple[ScalarField, VectorField]:
    names = [c.name for c in chart.coordinates]
    return scalar(chart, "U"), vector(chart, [f"A_{n}" for n in names])


def polynomial_fields(chart: CoordinateChart) -> tuple[ScalarField, VectorField]:
    """``U = a^2 c cos(b)``, ``A = (a c, a^2, c sin(b))`` in the chart's coordinates (a, b, c)."""
    a, b, c = (q.name for q in chart.coordinates)
    U = parse_expression(f"{a}^2*{c}*cos({b})")
    A = [parse_expression(t) for t in (f"{a}*{c}", f"{a}^2", f"{c}*sin({b})")]
    return ScalarField(U, chart), VectorField(tuple(A), chart)


# ---------------------------------------------------------------------------
# individual checks
# ---------------------------------------------------------------------------


def check_curl_grad(chart, seed):
    U, _ = opaque_fields(chart)
    return zero_check("curl(grad U) = 0", curl(grad(U)).components, chart, seed)


def check_div_curl(chart, seed):
    _, A = opaque_fields(chart)
    return zero_check("div(curl A) = 0", [vdiv(curl(A)).expr], chart, seed)


def check_metric_symmetric(chart, seed):
    g = chart.covariant_metric()
    return zero_check("g_ij symmetric", [sub(g[i, j], g[j, i]) for i in range(3) for j in range(i + 1, 3)],
                      chart, seed)


def check_metric_inverse(chart, seed):
    g, gi = chart.covariant_metric(), chart.contravariant_metric()
    res = []
    for i in range(3):
        for j in range(3):
            s = add(*(mul(g[i, k], gi[k, j]) for k in range(3)))
            res.append(sub(s, ONE) if i == j else s)
    return zero_check("g_ij g^jk = delta", res, chart, seed)


def check_jacobian_squared(chart, seed):
    J = chart.jacobian()
    return zero_check("J^2 = det g_ij", [sub(mul(J, J), det3(chart.covariant_metric().entries))],
                      chart, seed)


def check_reciprocal_jacobian(chart, seed):
    J = chart.jacobian()
    inv = chart.simplify(sqrt(det3(chart.contravariant_metric().entries)))
    return zero_check("sqrt(det g^ij) * J = 1", [sub(mul(inv, J), ONE)], chart, seed)


def check_orthogonal_reduction(chart, seed):
    name = "orthogonal reduction to Lame forms"
    if not chart.is_orthogonal():
        return CheckResult(name, True, "chart is not orthogonal", skipped=True)
    U, A = opaque_fields(chart)
    res = [sub(a, b) for a, b in zip(grad(U).components, lame_grad(chart, U.expr))]
    res.append(sub(vdiv(A).expr, lame_div(chart, A.components)))
    res += [sub(a, b) for a, b in zip(curl(A).components, lame_curl(chart, A.components))]
    return zero_check(name, res, chart, seed)


def check_finite_differences(chart, seed):
    name = "finite-difference cross-validation"
    if chart.map_exprs is None:
        return CheckResult(name, True, "chart has no Cartesian map", skipped=True)
    U, A = polynomial_fields(chart)
    results = {
        "grad": grad(U).components,
        "div": vdiv(A).expr,
        "curl": curl(A).components,
        "laplacian": laplacian(U).expr,
    }
    reports = cross_validate(chart, U.expr, A.components, results, FD_POINTS, seed)
    worst = max(r.worst for r in reports.values())
    detail = ", ".join(f"{k} {r.worst:.1e}" for k, r in reports.items())
    return CheckResult(name, worst <= FD_TOL, f"max rel err {detail}; tol {FD_TOL:g}")


CHECKS: list[Callable[[CoordinateChart, int], CheckResult]] = [
    check_metric_symmetric,
    check_metric_inverse,
    check_jacobian_squared,
    check_reciprocal_jacobian,
    check_curl_grad,
    check_div_curl,
    check_orthogonal_reduction,
    check_finite_differences,
]


def run_checks(chart: CoordinateChart, seed: int = 0) -> list[CheckResult]:
    """Run every check in a fixed order; a degenerate chart raises before any output."""
    chart.metric_determinant()
    out = []
    for check in CHECKS:
        try:
            out.append(check(chart, seed))
        except DegenerateChartError:
            raise
        except Exception as exc:  # report, keep going
            out.append(CheckResult(check.__name__.removeprefix("check_"), False,
                                   f"error: {type(exc).__name__}: {exc}"))
    return out
