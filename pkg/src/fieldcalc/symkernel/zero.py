"""Tri-state zero testing: structural proof first, random evaluation second."""
from __future__ import annotations

import enum
import itertools
import random
from typing import Iterable

from .assumptions import NONE, Assumptions
from .evaluate import DomainError, lambdify
from .expr import Cos, Expr, FieldFunction, PartialDerivative, Sin, preorder
from .normal import normal_form

SAMPLES = 16
MAX_FAILURES = 100
NONZERO_TOL = 1e-6
ZERO_TOL = 1e-10

POSITIVE_RANGE = (0.1, 2.0)
FREE_RANGE = (-2.0, 2.0)
ANGLE_RANGE = (0.1, 3.0)


class ZeroResult(enum.Enum):
    PROVED_ZERO = "ProvedZero"
    PROVED_NONZERO = "ProvedNonZero"
    UNKNOWN = "Unknown"

    def __str__(self) -> str:
        return self.value


def angle_symbols(exprs: Iterable[Expr]) -> set[str]:
    """Names that occur inside a sin/cos argument."""
    out: set[str] = set()
    for e in exprs:
        for n in preorder(e):
            if type(n) is Sin or type(n) is Cos:
                out |= n.arg.free_symbols
    return out


class PointSampler:
    """Random points that respect positivity, interval and angle facts."""

    def __init__(self, names: Iterable[str], assumptions: Assumptions = NONE,
                 angles: Iterable[str] = (), rng: random.Random | None = None):
        self.names = sorted(names)
        self.assume = assumptions
        self.angles = set(angles)
        self.rng = rng or random.Random(0)
        self._checks = None

    def _range(self, name: str) -> tuple[float, float]:
        b = self.assume.bounds(name)
        if name in self.angles:
            lo, hi = ANGLE_RANGE
        elif self.assume.is_positive_symbol(name):
            lo, hi = POSITIVE_RANGE
        else:
            lo, hi = FREE_RANGE
        if b is not None:
            lo, hi = max(lo, b[0]), min(hi, b[1])
            if lo >= hi:
                lo, hi = b
        return lo, hi

    def _positivity_checks(self):
        if self._checks is None:
            exprs = list(self.assume.positive_exprs)
            names = list(self.names)
            missing = set().union(*(e.free_symbols for e in exprs)) - set(names) if exprs else set()
            if missing:
                exprs = [e for e in exprs if not (e.free_symbols & missing)]
            self._checks = lambdify(exprs, names) if exprs else None
        return self._checks

    def draw(self) -> dict[str, float]:
        while True:
            pt = {n: self.rng.uniform(*self._range(n)) for n in self.names}
            chk = self._positivity_checks()
            if chk is None:
                return pt
            try:
                vals = chk(*(pt[n] for n in self.names))
            except DomainError:
                continue
            if all(v > 0 for v in vals):
                return pt


class RandomFieldOracle:
    """Replace each opaque field by a seeded random cubic in its arguments.

    Derivative nodes are answered with exact derivatives of that polynomial,
    so the oracle is consistent with differentiation.
    """

    DEGREE = 3

    def __init__(self, rng: random.Random):
        self.rng = rng
        self.polys: dict[tuple, dict[tuple, float]] = {}

    def _poly(self, f: FieldFunction) -> dict[tuple, float]:
        key = (f.name, len(f.params))
        p = self.polys.get(key)
        if p is None:
            n = len(f.params)
            p = {}
            for exps in itertools.product(range(self.DEGREE + 1), repeat=n):
                if sum(exps) <= self.DEGREE:
                    p[exps] = self.rng.uniform(-1.0, 1.0)
            self.polys[key] = p
        return p

    def __call__(self, node: Expr, env) -> float:
        if type(node) is FieldFunction:
            f, orders = node, (0,) * len(node.params)
        elif type(node) is PartialDerivative:
            f, orders = node.target, node.orders
        else:  # pragma: no cover
            raise TypeError(node)
        xs = [env[p.name] for p in f.params]
        total = 0.0
        for exps, c in self._poly(f).items():
            term = c
            for x, e, k in zip(xs, exps, orders):
                if k > e:
                    term = 0.0
                    break
                fall = 1
                for j in range(k):
                    fall *= e - j
                term *= fall * x ** (e - k)
            total += term
        return total


def numeric_residuals(e: Expr, seed: int, assumptions: Assumptions = NONE,
                      samples: int = SAMPLES) -> list[float] | None:
    """Values of ``e`` at ``samples`` random points; None if sampling kept failing."""
    rng = random.Random(seed)
    names = set(e.free_symbols)
    for pe in assumptions.positive_exprs:
        names |= pe.free_symbols
    sampler = PointSampler(names, assumptions, angle_symbols([e]), rng)
    fn = lambdify([e], sampler.names)
    oracle = RandomFieldOracle(rng)
    values: list[float] = []
    failures = 0
    while len(values) < samples:
        pt = sampler.draw()
        try:
            values.append(fn(*(pt[n] for n in sampler.names), oracle=oracle)[0])
            failures = 0
        except (DomainError, ValueError):
            failures += 1
            if failures >= MAX_FAILURES:
                return None
    return values


def is_zero(e: Expr, seed: int = 0, assumptions: Assumptions | None = None) -> ZeroResult:
    """Decide whether ``e`` is identically zero.

    ``PROVED_ZERO`` only when the normal form of ``e`` is literally zero.
    Otherwise ``e`` is evaluated at random points; a clearly nonzero value
    proves it nonzero, anything else is ``UNKNOWN``.
    """
    assumptions = assumptions or NONE
    try:
        _, r = normal_form(e, assumptions)
    except DomainError:
        r = None
    if r is not None and not r.num:
        return ZeroResult.PROVED_ZERO
    values = numeric_residuals(e, seed, assumptions)
    if values is None:
        return ZeroResult.UNKNOWN
    if any(abs(v) > NONZERO_TOL for v in values):
        return ZeroResult.PROVED_NONZERO
    return ZeroResult.UNKNOWN
