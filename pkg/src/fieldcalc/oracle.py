"""Numeric cross-check of the symbolic operators through the Cartesian map.

Nothing here uses the metric. Derivatives come from fourth-order central
differences of the map and of the fields, and vectors are compared in
Cartesian space after pushing physical components forward along the unit
covariant basis ``e_i = (dR/dxi^i) / |dR/dxi^i|``.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .geometry import CoordinateChart
from .symkernel.evaluate import DomainError, lambdify
from .symkernel.expr import Expr
from .symkernel.zero import PointSampler, angle_symbols

STEP = 1e-3
MAX_COND = 1e6


def central_diff(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, i: int,
                 h: float = STEP) -> np.ndarray:
    """Fourth-order central difference of ``f`` along coordinate ``i``."""
    e = np.zeros_like(x)
    e[i] = h
    return (-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e)) / (12 * h)


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1.0))


class MapOracle:
    """Finite-difference operators for one chart evaluated at fixed parameters.

    Parameters
    ----------
    chart : CoordinateChart
        Must have a Cartesian map.
    params : dict
        Numeric values for the chart parameters.
    """

    def __init__(self, chart: CoordinateChart, params: dict[str, float]):
        if chart.map_exprs is None:
            raise ValueError(f"chart {chart.name!r} has no Cartesian map")
        self.chart = chart
        self.params = dict(params)
        self.coord_names = [c.name for c in chart.coordinates]
        self.param_names = [p.name for p in chart.parameters]
        self._map = self.compile(chart.map_exprs)

    def compile(self, exprs: Sequence[Expr]) -> Callable[[np.ndarray], np.ndarray]:
        fn = lambdify(list(exprs), self.coord_names + self.param_names)
        pv = [self.params[n] for n in self.param_names]
        return lambda xi: np.array(fn(*xi, *pv), dtype=float)

    def position(self, xi: np.ndarray) -> np.ndarray:
        return self._map(xi)

    def tangent(self, xi: np.ndarray) -> np.ndarray:
        """``M[k, i] = d x_k / d xi^i``."""
        return np.column_stack([central_diff(self._map, xi, i) for i in range(3)])

    def unit_basis(self, xi: np.ndarray) -> np.ndarray:
        m = self.tangent(xi)
        return m / np.linalg.norm(m, axis=0)

    def push(self, xi: np.ndarray, physical: np.ndarray) -> np.ndarray:
        """Cartesian vector with physical components ``physical`` at ``xi``."""
        return self.unit_basis(xi) @ physical

    def condition(self, xi: np.ndarray) -> float:
        return float(np.linalg.cond(self.tangent(xi)))

    # operators on callables of xi -----------------------------------------
    def grad(self, u: Callable, xi: np.ndarray) -> np.ndarray:
        d = np.array([central_diff(u, xi, i) for i in range(3)]).reshape(3)
        return np.linalg.solve(self.tangent(xi).T, d)

    def jacobian_of(self, F: Callable, xi: np.ndarray) -> np.ndarray:
        """``dF_a / dx_b`` for a Cartesian-valued ``F`` of ``xi``."""
        dxi = np.column_stack([central_diff(F, xi, i) for i in range(3)])
        return dxi @ np.linalg.inv(self.tangent(xi))

    def div(self, F: Callable, xi: np.ndarray) -> float:
        return float(np.trace(self.jacobian_of(F, xi)))

    def curl(self, F: Callable, xi: np.ndarray) -> np.ndarray:
        d = self.jacobian_of(F, xi)
        return np.array([d[2, 1] - d[1, 2], d[0, 2] - d[2, 0], d[1, 0] - d[0, 1]])


@dataclass
class OracleReport:
    operator: str
    errors: list[float]

    @property
    def worst(self) -> float:
        return max(self.errors) if self.errors else 0.0

    def ok(self, tol: float) -> bool:
        return bool(self.errors) and self.worst <= tol


def sample_points(chart: CoordinateChart, n: int, seed: int,
                  exprs: Sequence[Expr] = ()) -> list[dict[str, float]]:
    """``n`` seeded points (coordinates and parameters) away from singular sets."""
    names = [c.name for c in chart.coordinates] + [p.name for p in chart.parameters]
    rng = random.Random(seed)
    angles = angle_symbols(list(chart.map_exprs or ()) + list(exprs))
    sampler = PointSampler(names, chart.assumptions, angles, rng)
    out = []
    tries = 0
    while len(out) < n:
        tries += 1
        if tries > 100 * n:
            raise RuntimeError(f"could not find {n} regular points on {chart.name!r}")
        pt = sampler.draw()
        params = {p.name: pt[p.name] for p in chart.parameters}
        xi = np.array([pt[c.name] for c in chart.coordinates])
        try:
            if MapOracle(chart, params).condition(xi) > MAX_COND:
                continue
        except (DomainError, np.linalg.LinAlgError, ZeroDivisionError):
            continue
        out.append(pt)
    return out


def cross_validate(chart: CoordinateChart, U: Expr, A: Sequence[Expr], results: dict,
                   points: int = 20, seed: int = 0) -> dict[str, OracleReport]:
    """Compare symbolic results with the finite-difference oracle.

    ``results`` maps operator names (``grad``, ``div``, ``curl``,
    ``laplacian``) to symbolic outputs: a scalar expression or a sequence of
    three physical components. ``U`` and ``A`` are the inputs they were
    computed from.
    """
    coord = [c.name for c in chart.coordinates]
    pnames = [p.name for p in chart.parameters]
    allnames = coord + pnames
    exprs = [U, *A] + [e for v in results.values() for e in (v if isinstance(v, (list, tuple)) else [v])]
    reports = {k: OracleReport(k, []) for k in results}
    sym = {k: lambdify(list(v) if isinstance(v, (list, tuple)) else [v], allnames)
           for k, v in results.items()}
    for pt in sample_points(chart, points, seed, exprs):
        params = {n: pt[n] for n in pnames}
        pv = [pt[n] for n in pnames]
        xi = np.array([pt[n] for n in coord])
        orc = MapOracle(chart, params)
        u = orc.compile([U])
        a = orc.compile(list(A))

        def F(x):
            return orc.push(x, a(x))

        def G(x):
            return orc.grad(u, x)

        for k, fn in sym.items():
            val = np.array(fn(*xi, *pv), dtype=float)
            if k == "grad":
                err = relative_error(orc.push(xi, val), orc.grad(u, xi))
            elif k == "div":
                err = relative_error(val, orc.div(F, xi))
            elif k == "curl":
                err = relative_error(orc.push(xi, val), orc.curl(F, xi))
            elif k == "laplacian":
                err = relative_error(val, orc.div(G, xi))
            else:
                raise KeyError(k)
            reports[k].errors.append(err)
    return reports
