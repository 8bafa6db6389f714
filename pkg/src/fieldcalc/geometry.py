"""Metric tensors, Jacobian and Lamé coefficients of a coordinate chart.

Basis vectors are never built. Everything downstream is expressed through
``g_ij``, ``g^ij``, ``J = sqrt(det g_ij)`` and ``H_i = sqrt(g_ii)``.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

from .parser import ChartError, ChartSpec, parse_chart, parse_expression
from .symkernel.assumptions import Assumptions
from .symkernel.calculus import differentiate, subs
from .symkernel.expr import (
    ZERO,
    Expr,
    FieldFunction,
    Symbol,
    add,
    div,
    mul,
    neg,
    sqrt,
    sub,
    sympify,
)
from .symkernel.normal import simplify

COVARIANT = "covariant"
CONTRAVARIANT = "contravariant"


class DegenerateChartError(ValueError):
    """The covariant metric of the chart has a determinant that is identically zero."""


Matrix = tuple[tuple[Expr, Expr, Expr], tuple[Expr, Expr, Expr], tuple[Expr, Expr, Expr]]


def _matrix(rows) -> Matrix:
    return tuple(tuple(row) for row in rows)


def det3(m: Sequence[Sequence[Expr]]) -> Expr:
    """Cofactor expansion along the first row."""
    return add(
        mul(m[0][0], sub(mul(m[1][1], m[2][2]), mul(m[1][2], m[2][1]))),
        neg(mul(m[0][1], sub(mul(m[1][0], m[2][2]), mul(m[1][2], m[2][0])))),
        mul(m[0][2], sub(mul(m[1][0], m[2][1]), mul(m[1][1], m[2][0]))),
    )


def adjugate3(m: Sequence[Sequence[Expr]]) -> list[list[Expr]]:
    def minor(i: int, j: int) -> Expr:
        r = [k for k in range(3) if k != i]
        c = [k for k in range(3) if k != j]
        return sub(mul(m[r[0]][c[0]], m[r[1]][c[1]]), mul(m[r[0]][c[1]], m[r[1]][c[0]]))

    # adj[i][j] = (-1)^(i+j) * M_ji
    return [[minor(j, i) if (i + j) % 2 == 0 else neg(minor(j, i)) for j in range(3)]
            for i in range(3)]


@dataclass(frozen=True)
class MetricTensor:
    """Symmetric 3x3 matrix of expressions with a variance tag."""

    entries: Matrix
    variance: str

    def __getitem__(self, ij: tuple[int, int]) -> Expr:
        i, j = ij
        return self.entries[i][j]

    def rows(self) -> list[list[Expr]]:
        return [list(r) for r in self.entries]

    def is_diagonal(self, assumptions: Assumptions | None = None) -> bool:
        return all(simplify(self.entries[i][j], assumptions) == ZERO
                   for i in range(3) for j in range(3) if i != j)


class CoordinateChart:
    """A 3-D chart given by a Cartesian map or by a metric.

    Derived quantities are computed lazily, once, under a lock, so concurrent
    first access sees a single result.

    Parameters
    ----------
    spec : ChartSpec
        Validated chart description, usually from :func:`parse_chart` or
        :mod:`fieldcalc.builtin_charts`.
    """

    def __init__(self, spec: ChartSpec):
        self.spec = spec
        self.name = spec.name
        self.coordinates: tuple[Symbol, Symbol, Symbol] = tuple(Symbol(n) for n in spec.coordinate_names)
        self.parameters: tuple[Symbol, ...] = tuple(Symbol(n) for n in spec.parameters)
        self.assumptions: Assumptions = spec.assumptions
        self.map_exprs = spec.map_exprs
        self._lock = threading.RLock()
        self._cache: dict[str, object] = {}

    # -- construction ------------------------------------------------------
    @classmethod
    def from_text(cls, text: str, name: str = "chart") -> "CoordinateChart":
        return cls(parse_chart(text, name))

    @classmethod
    def from_file(cls, path: str | Path) -> "CoordinateChart":
        p = Path(path)
        return cls(parse_chart(p.read_text(encoding="utf-8"), p.stem))

    def with_parameters(self, values: Mapping[str, Expr | str | int]) -> "CoordinateChart":
        """Fix parameters to values (expressions or text) before any derivation."""
        if not values:
            return self
        spec = self.spec
        mapping: dict[str, Expr] = {}
        for k, v in values.items():
            if k not in spec.parameters:
                raise ChartError(f"{k!r} is not a parameter of chart {spec.name!r} "
                                 f"(parameters: {', '.join(spec.parameters) or 'none'})")
            e = parse_expression(v) if isinstance(v, str) else sympify(v)
            stray = e.free_symbols - set(spec.coordinate_names) - set(spec.parameters)
            if stray:
                raise ChartError(f"unknown symbol {sorted(stray)[0]!r} in value for {k!r}")
            mapping[k] = e

        def s(e: Expr) -> Expr:
            return subs(e, mapping)

        a = spec.assumptions
        kept_exprs = tuple(x for x in (s(e) for e in a.positive_exprs) if x.free_symbols)
        assumptions = Assumptions(
            positive=frozenset(n for n in a.positive if n not in mapping),
            intervals=tuple(iv for iv in a.intervals if iv[0] not in mapping),
            positive_exprs=kept_exprs,
        )
        new = replace(
            spec,
            parameters=tuple(p for p in spec.parameters if p not in mapping),
            map_exprs=tuple(s(e) for e in spec.map_exprs) if spec.map_exprs else None,
            metric_exprs=(tuple(tuple(s(e) for e in row) for row in spec.metric_exprs)
                          if spec.metric_exprs else None),
            assumptions=assumptions,
        )
        return CoordinateChart(new)

    # -- helpers -----------------------------------------------------------
    def simplify(self, e: Expr) -> Expr:
        return simplify(e, self.assumptions)

    def field(self, name: str) -> FieldFunction:
        """Opaque scalar function of all three coordinates."""
        return FieldFunction(name, self.coordinates)

    @property
    def symbols(self) -> set[str]:
        return {c.name for c in self.coordinates} | {p.name for p in self.parameters}

    def _cached(self, key: str, build):
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        with self._lock:
            hit = self._cache.get(key)
            if hit is None:
                hit = build()
                self._cache[key] = hit
            return hit

    def __repr__(self) -> str:
        return f"CoordinateChart({self.name!r}, coordinates={self.spec.coordinate_names})"

    # -- derived quantities -----------------------------------------------
    def map_jacobian(self) -> Matrix:
        """``d x_k / d xi^i`` as rows k = x, y, z and columns i."""
        if self.map_exprs is None:
            raise ChartError(f"chart {self.name!r} has no Cartesian map")
        return self._cached("dmap", lambda: _matrix(
            [[self.simplify(differentiate(x, q)) for q in self.coordinates] for x in self.map_exprs]))

    def covariant_metric(self) -> MetricTensor:
        return self._cached("co", self._build_covariant)

    def contravariant_metric(self) -> MetricTensor:
        return self._cached("contra", self._build_contravariant)

    def metric_determinant(self) -> Expr:
        """``det g_ij``, simplified; raises DegenerateChartError when it is zero."""
        return self._cached("det", self._build_det)

    def jacobian(self) -> Expr:
        return self._cached("J", lambda: self.simplify(sqrt(self.metric_determinant())))

    def lame_coefficients(self) -> tuple[Expr, Expr, Expr]:
        def build():
            g = self.covariant_metric()
            return tuple(self.simplify(sqrt(g[i, i])) for i in range(3))

        return self._cached("H", build)

    def orientation(self) -> int:
        """Sign of ``det(dx/dxi)``: +1 for right-handed charts, -1 for left-handed.

        ``jacobian`` is the positive root, so curl and cross multiply by this
        sign to stay correct in Cartesian space. Metric-only charts are taken
        as right-handed.
        """
        def build():
            if self.map_exprs is None:
                return (1,)
            signed = det3(self.map_jacobian())
            J = self.jacobian()
            if self.simplify(sub(signed, J)) == ZERO:
                return (1,)
            if self.simplify(add(signed, J)) == ZERO:
                return (-1,)
            return (_numeric_sign(signed, self),)

        return self._cached("orient", build)[0]

    def is_orthogonal(self) -> bool:
        return self._cached("orth", lambda: (self.covariant_metric().is_diagonal(self.assumptions),))[0]

    def lower_components(self, physical: Sequence[Expr]) -> tuple[Expr, Expr, Expr]:
        """Covariant components ``A_i = sum_j g_ij * A^j / H_j`` of physical ``A^j``."""
        g = self.covariant_metric()
        H = self.lame_coefficients()
        return tuple(
            self.simplify(add(*(mul(g[i, j], div(physical[j], H[j])) for j in range(3))))
            for i in range(3)
        )

    def _build_covariant(self) -> MetricTensor:
        if self.map_exprs is not None:
            d = self.map_jacobian()
            rows = [[None] * 3 for _ in range(3)]
            for i in range(3):
                for j in range(i, 3):
                    v = self.simplify(add(*(mul(d[k][i], d[k][j]) for k in range(3))))
                    rows[i][j] = rows[j][i] = v
            return MetricTensor(_matrix(rows), COVARIANT)
        given = self.spec.metric_exprs
        if self.spec.metric_variance == COVARIANT:
            return MetricTensor(_matrix([[self.simplify(e) for e in row] for row in given]), COVARIANT)
        return MetricTensor(self._invert(given), COVARIANT)

    def _build_contravariant(self) -> MetricTensor:
        given = self.spec.metric_exprs
        if given is not None and self.spec.metric_variance == CONTRAVARIANT:
            return MetricTensor(_matrix([[self.simplify(e) for e in row] for row in given]),
                                CONTRAVARIANT)
        self.metric_determinant()
        return MetricTensor(self._invert(self.covariant_metric().entries), CONTRAVARIANT)

    def _build_det(self) -> Expr:
        d = self.simplify(det3(self.covariant_metric().entries))
        if d == ZERO:
            raise DegenerateChartError(f"chart {self.name!r} is degenerate: det(g_ij) = 0")
        return d

    def _invert(self, m: Sequence[Sequence[Expr]]) -> Matrix:
        d = self.simplify(det3(m))
        if d == ZERO:
            raise DegenerateChartError(f"chart {self.name!r} is degenerate: singular metric")
        adj = adjugate3(m)
        rows = [[None] * 3 for _ in range(3)]
        for i in range(3):
            for j in range(i, 3):
                v = self.simplify(div(adj[i][j], d))
                rows[i][j] = rows[j][i] = v
        return _matrix(rows)


def _numeric_sign(e: Expr, chart: CoordinateChart) -> int:
    import random

    from .symkernel.evaluate import DomainError, eval_numeric
    from .symkernel.zero import PointSampler, angle_symbols

    names = chart.symbols
    sampler = PointSampler(names, chart.assumptions, angle_symbols([e]), random.Random(0))
    for _ in range(100):
        try:
            v = eval_numeric(e, sampler.draw())
        except DomainError:
            continue
        if abs(v) > 1e-9:
            return 1 if v > 0 else -1
    raise DegenerateChartError(f"cannot determine the orientation of chart {chart.name!r}")


def covariant_metric(chart: CoordinateChart) -> MetricTensor:
    return chart.covariant_metric()


def contravariant_metric(chart: CoordinateChart) -> MetricTensor:
    return chart.contravariant_metric()


def jacobian(chart: CoordinateChart) -> Expr:
    return chart.jacobian()


def lame_coefficients(chart: CoordinateChart) -> tuple[Expr, Expr, Expr]:
    return chart.lame_coefficients()


def lower_components(chart: CoordinateChart, A) -> tuple[Expr, Expr, Expr]:
    """Covariant components of a VectorField (or a sequence of physical components)."""
    comps = getattr(A, "components", A)
    return chart.lower_components(comps)


def load_chart(ref: str, values: Mapping[str, str] | None = None) -> CoordinateChart:
    """Resolve a built-in name or a chart file path, then fix parameters."""
    from .builtin_charts import builtin_chart, is_builtin

    chart = builtin_chart(ref) if is_builtin(ref) else CoordinateChart.from_file(ref)
    return chart.with_parameters(values or {})
