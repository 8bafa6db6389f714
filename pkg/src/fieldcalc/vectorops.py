"""Physically normalized vector calculus on a coordinate chart.

Every vector enters and leaves as physical components ``Ā^i`` (components
along unit covariant basis vectors). Contravariant and covariant
components only exist inside the operators:

=========  ==========================================================
grad       ``Ā^j = H_j * sum_i g^ij dU/dxi^i``
div        ``(1/J) * sum_i d/dxi^i (J Ā^i / H_i)``
curl       ``Ā^i = s (H_i/J) * sum_jk eps_ijk dA_k/dxi^j``, ``A_k`` lowered
laplacian  ``div(grad U)``
dot        ``sum_ij Ā^i B̄^j g_ij / (H_i H_j)``
cross      ``Ā^k = s (H_k/J) * sum_ij eps_ijk A_i B_j``, lowered ``A_i, B_j``
=========  ==========================================================

``J`` is the positive root ``sqrt(det g_ij)`` and ``s`` is the chart
orientation (``-1`` when ``det(dx/dxi) < 0``, as for the toroidal chart).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .geometry import CoordinateChart
from .parser import parse_expression
from .symkernel.calculus import differentiate
from .symkernel.expr import Expr, FieldFunction, PartialDerivative, add, div as _div, mul, preorder, sympify

# (i, j, k) -> sign for the even and odd permutations of (0, 1, 2)
LEVI_CIVITA = {
    (0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1,
    (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1,
}


class ChartMismatchError(ValueError):
    """Operands are bound to different charts."""


def _check_symbols(e: Expr, chart: CoordinateChart) -> None:
    stray = e.free_symbols - chart.symbols
    if stray:
        raise ValueError(
            f"unknown symbol {sorted(stray)[0]!r} for chart {chart.name!r} "
            f"(coordinates: {', '.join(c.name for c in chart.coordinates)})")
    coords = set(chart.coordinates)
    for n in preorder(e):
        if isinstance(n, (FieldFunction, PartialDerivative)):
            f = n if isinstance(n, FieldFunction) else n.target
            if not set(f.params) <= coords:
                raise ValueError(f"field {f.name!r} takes non-coordinate arguments")


def _as_expr(x) -> Expr:
    return parse_expression(x) if isinstance(x, str) else sympify(x)


@dataclass(frozen=True)
class ScalarField:
    expr: Expr
    chart: CoordinateChart

    def __post_init__(self):
        object.__setattr__(self, "expr", _as_expr(self.expr))
        _check_symbols(self.expr, self.chart)


@dataclass(frozen=True)
class VectorField:
    """Three physical components ``Ā^i`` on ``chart``."""

    components: tuple[Expr, Expr, Expr]
    chart: CoordinateChart

    def __post_init__(self):
        comps = tuple(_as_expr(c) for c in self.components)
        if len(comps) != 3:
            raise ValueError(f"a vector field needs 3 components, got {len(comps)}")
        for c in comps:
            _check_symbols(c, self.chart)
        object.__setattr__(self, "components", comps)

    def __getitem__(self, i: int) -> Expr:
        return self.components[i]

    def __iter__(self):
        return iter(self.components)


def scalar(chart: CoordinateChart, e) -> ScalarField:
    """Scalar field from an expression, text, or a bare name (opaque field)."""
    if isinstance(e, str) and e.isidentifier() and e not in chart.symbols and e != "pi":
        return ScalarField(chart.field(e), chart)
    return ScalarField(_as_expr(e), chart)


def vector(chart: CoordinateChart, comps: Sequence) -> VectorField:
    """Vector field from three physical components (bare names become opaque fields)."""
    return VectorField(tuple(scalar(chart, c).expr for c in comps), chart)


def _same_chart(a, b) -> CoordinateChart:
    if a.chart is not b.chart:
        raise ChartMismatchError(f"fields live on different charts ({a.chart.name!r}, {b.chart.name!r})")
    return a.chart


def grad(U: ScalarField) -> VectorField:
    ch = U.chart
    gi = ch.contravariant_metric()
    H = ch.lame_coefficients()
    dU = [differentiate(U.expr, q) for q in ch.coordinates]
    comps = tuple(
        ch.simplify(mul(H[j], add(*(mul(gi[i, j], dU[i]) for i in range(3)))))
        for j in range(3)
    )
    return VectorField(comps, ch)


def div(A: VectorField) -> ScalarField:
    ch = A.chart
    J = ch.jacobian()
    H = ch.lame_coefficients()
    terms = []
    for i, q in enumerate(ch.coordinates):
        inner = ch.simplify(mul(J, _div(A[i], H[i])))
        terms.append(differentiate(inner, q))
    return ScalarField(ch.simplify(_div(add(*terms), J)), ch)


def curl(A: VectorField) -> VectorField:
    ch = A.chart
    J = ch.jacobian()
    H = ch.lame_coefficients()
    low = ch.lower_components(A.components)
    d = {(j, k): differentiate(low[k], ch.coordinates[j]) for j in range(3) for k in range(3) if j != k}
    comps = []
    for i in range(3):
        s = add(*(mul(sign, d[j, k]) for (ii, j, k), sign in LEVI_CIVITA.items() if ii == i))
        comps.append(ch.simplify(mul(ch.orientation(), _div(H[i], J), s)))
    return VectorField(tuple(comps), ch)


def laplacian(U: ScalarField) -> ScalarField:
    return div(grad(U))


def dot(A: VectorField, B: VectorField) -> ScalarField:
    ch = _same_chart(A, B)
    g = ch.covariant_metric()
    H = ch.lame_coefficients()
    terms = [mul(A[i], B[j], _div(g[i, j], mul(H[i], H[j]))) for i in range(3) for j in range(3)]
    return ScalarField(ch.simplify(add(*terms)), ch)


def cross(A: VectorField, B: VectorField) -> VectorField:
    ch = _same_chart(A, B)
    J = ch.jacobian()
    H = ch.lame_coefficients()
    a = ch.lower_components(A.components)
    b = ch.lower_components(B.components)
    comps = []
    for k in range(3):
        s = add(*(mul(sign, a[i], b[j]) for (i, j, kk), sign in LEVI_CIVITA.items() if kk == k))
        comps.append(ch.simplify(mul(ch.orientation(), _div(H[k], J), s)))
    return VectorField(tuple(comps), ch)
