"""Shared generators and numeric helpers for the test suite."""
from __future__ import annotations

import math
import sys
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import strategies as st

from fieldcalc.builtin_charts import builtin_chart
from fieldcalc.symkernel import (
    DomainError,
    Symbol,
    add,
    cos,
    eval_numeric,
    mul,
    neg,
    number,
    power,
    sin,
    sqrt,
)

CHART_NAMES = ["cartesian", "cylinder", "sphere", "toroidal", "shifted-cylinder"]

X, Y, Z = Symbol("x"), Symbol("y"), Symbol("z")


def chart_variants():
    """Every built-in chart plus the shifted cylinder at alpha = pi/3."""
    out = [(n, builtin_chart(n)) for n in CHART_NAMES]
    out.append(("shifted-cylinder@pi/3",
                builtin_chart("shifted-cylinder").with_parameters({"alpha": "pi/3"})))
    return out


@pytest.fixture(params=[v[0] for v in chart_variants()])
def any_chart(request):
    return dict(chart_variants())[request.param]


# ---------------------------------------------------------------------------
# closed-form expressions in x, y, z (no fields)
# ---------------------------------------------------------------------------

_leaf = st.one_of(
    st.sampled_from([X, Y, Z]),
    st.integers(-5, 5).map(number),
    st.tuples(st.integers(-5, 5), st.integers(1, 4)).map(lambda t: number(Fraction(*t))),
)


def _extend(children):
    return st.one_of(
        st.lists(children, min_size=2, max_size=3).map(lambda xs: add(*xs)),
        st.lists(children, min_size=2, max_size=3).map(lambda xs: mul(*xs)),
        children.map(neg),
        st.tuples(children, st.integers(0, 3)).map(lambda t: power(t[0], number(t[1]))),
        children.map(sin),
        children.map(cos),
    )


closed_exprs = st.recursive(_leaf, _extend, max_leaves=8)


def smooth_exprs():
    """Closed-form expressions without roots (finite everywhere)."""
    return closed_exprs


def positive_sqrt_exprs():
    return closed_exprs.map(lambda e: sqrt(add(number(3), mul(e, e))))


def safe_eval(e, env):
    try:
        v = eval_numeric(e, env)
    except (DomainError, OverflowError, ValueError):
        return None
    if not math.isfinite(v) or abs(v) > 1e8:
        return None
    return v


def random_env(rng: random.Random, names=("x", "y", "z")):
    return {n: rng.uniform(-2.0, 2.0) for n in names}


# ---------------------------------------------------------------------------
# grammar-valid expression text for round-trip checks
# ---------------------------------------------------------------------------

_NAMES = ["x", "y", "z", "r", "phi", "theta", "alpha", "R0", "A_r", "u_1"]


def random_expr_text(rng: random.Random, depth: int = 0) -> str:
    """Random text in the expression grammar (numbers kept small)."""
    if depth > 3 or rng.random() < 0.3:
        k = rng.random()
        if k < 0.45:
            return rng.choice(_NAMES)
        if k < 0.7:
            return str(rng.randint(0, 12))
        if k < 0.8:
            return f"{rng.randint(0, 9)}.{rng.randint(0, 99):02d}"
        if k < 0.87:
            return "pi"
        if k < 0.95:
            args = rng.sample(["r", "phi", "z", "x"], rng.randint(1, 3))
            return f"{rng.choice(['U', 'V', 'A_phi'])}({', '.join(args)})"
        return f"diff(U(r, phi, z), {', '.join(rng.choices(['r', 'phi', 'z'], k=rng.randint(1, 3)))})"
    d = depth + 1
    k = rng.random()
    if k < 0.45:
        op = rng.choice(["+", "-", "*", "/"])
        return f"{random_expr_text(rng, d)} {op} {random_expr_text(rng, d)}"
    if k < 0.6:
        base = random_expr_text(rng, d)
        exp = rng.choice(["2", "3", "-1", "(1/2)", "(2/3)", "n", "(-2)"])
        return f"({base})^{exp}"
    if k < 0.8:
        fn = rng.choice(["sin", "cos", "tan", "sqrt"])
        return f"{fn}({random_expr_text(rng, d)})"
    if k < 0.9:
        return f"-{random_expr_text(rng, d)}"
    return f"({random_expr_text(rng, d)})"


# ---------------------------------------------------------------------------
# numeric metric oracle: M^T M from finite differences of the map
# ---------------------------------------------------------------------------


def numeric_metric(chart, env: dict[str, float], h: float = 1e-4) -> np.ndarray:
    names = [c.name for c in chart.coordinates]

    def pos(vals):
        e2 = dict(env)
        e2.update(zip(names, vals))
        return np.array([eval_numeric(m, e2) for m in chart.map_exprs])

    x0 = np.array([env[n] for n in names])
    cols = []
    for i in range(3):
        d = np.zeros(3)
        d[i] = h
        cols.append((-pos(x0 + 2 * d) + 8 * pos(x0 + d) - 8 * pos(x0 - d) + pos(x0 - 2 * d)) / (12 * h))
    M = np.column_stack(cols)
    return M.T @ M


# ---------------------------------------------------------------------------
# acceptance verdicts, one line per criterion
# ---------------------------------------------------------------------------


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    verdicts = getattr(mod, "VERDICTS", None)
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for line in verdicts:
        terminalreporter.write_line(line)
