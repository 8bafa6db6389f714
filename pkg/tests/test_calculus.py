"""Differentiation, substitution and numeric evaluation."""
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fieldcalc.parser import parse_expression as P
from fieldcalc.symkernel import (
    PI,
    ZERO,
    DomainError,
    FieldFunction,
    PartialDerivative,
    Symbol,
    SymbolicExponentError,
    UnboundSymbolError,
    add,
    cos,
    differentiate,
    eval_numeric,
    lambdify,
    mul,
    number,
    simplify,
    sin,
    sqrt,
    substitute,
)

from conftest import X, Y, closed_exprs, positive_sqrt_exprs, random_env, safe_eval

r, phi, z, alpha = (Symbol(n) for n in ("r", "phi", "z", "alpha"))
U = FieldFunction("U", [r, phi, z])


# -- differentiate ---------------------------------------------------------


def test_power_rule():
    assert differentiate(P("r^2"), r) == P("2*r")


def test_sin_derivative():
    assert differentiate(sin(phi), phi) == cos(phi)
    assert differentiate(cos(phi), phi) == P("-sin(phi)")


def test_field_function_derivative_node():
    d = differentiate(U, r)
    assert isinstance(d, PartialDerivative)
    assert d.orders == (1, 0, 0)
    assert d.target == U


def test_derivative_in_non_argument_is_zero():
    assert differentiate(U, alpha) == ZERO


def test_mixed_partials_are_one_node():
    a = differentiate(differentiate(U, r), phi)
    b = differentiate(differentiate(U, phi), r)
    assert a == b
    assert a.orders == (1, 1, 0)


def test_chain_rule_through_sqrt_and_field():
    e = P("sqrt(r^2 + 1)*U(r, phi, z)")
    got = differentiate(e, r)
    want = P("r/sqrt(r^2 + 1)*U(r, phi, z) + sqrt(r^2 + 1)*diff(U(r, phi, z), r)")
    assert simplify(got - want) == ZERO


def test_symbolic_exponent_in_variable_raises():
    with pytest.raises(SymbolicExponentError):
        differentiate(P("r^r"), r)
    # constant symbolic exponents are fine
    assert differentiate(P("r^n"), r) == P("n*r^(n - 1)")


@settings(max_examples=100, deadline=None)
@given(closed_exprs, closed_exprs, st.integers(-4, 4))
def test_linearity(e1, e2, a):
    lhs = differentiate(add(mul(number(a), e1), e2), X)
    rhs = add(mul(number(a), differentiate(e1, X)), differentiate(e2, X))
    assert simplify(lhs - rhs) == ZERO


def _fd_check(e, seed):
    rng = random.Random(seed)
    d = differentiate(e, X)
    h = 1e-4
    checked = 0
    tries = 0
    while checked < 20 and tries < 200:
        tries += 1
        env = random_env(rng)
        vals = []
        for k in (-2, -1, 1, 2):
            env2 = dict(env, x=env["x"] + k * h)
            vals.append(safe_eval(e, env2))
        exact = safe_eval(d, env)
        if exact is None or any(v is None for v in vals):
            continue
        fd = (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h)
        scale = max(abs(exact), 1.0)
        if max(abs(v) for v in vals) > 1e4:
            continue
        assert abs(fd - exact) / scale <= 1e-6, (e, env, fd, exact)
        checked += 1
    return checked


@settings(max_examples=60, deadline=None)
@given(closed_exprs, st.integers(0, 10_000))
def test_derivative_matches_finite_differences(e, seed):
    _fd_check(e, seed)


@settings(max_examples=40, deadline=None)
@given(positive_sqrt_exprs(), st.integers(0, 10_000))
def test_derivative_of_roots_matches_finite_differences(e, seed):
    _fd_check(e, seed)


def test_fd_consistency_reaches_twenty_points():
    e = P("sin(x*y)^2*sqrt(1 + x^2) + cos(z)/(2 + y^2)")
    assert _fd_check(e, 3) == 20


# -- substitute --------------------------------------------------------------


def test_substitute_alpha_pi_third():
    got = substitute(sin(alpha), alpha, P("pi/3"))
    assert got == P("sqrt(3)/2")


def test_substitute_absent_symbol():
    assert substitute(X, Y, number(5)) == X


def test_substitute_merges_factors():
    assert substitute(P("r*z"), z, r) == P("r^2")


def test_substitute_renames_field_arguments():
    got = substitute(U, z, Symbol("w"))
    assert got == FieldFunction("U", [r, phi, Symbol("w")])
    with pytest.raises(ValueError):
        substitute(U, z, P("2*r"))


# -- eval_numeric ------------------------------------------------------------


def test_eval_basic():
    assert eval_numeric(P("r*cos(phi)"), {"r": 2, "phi": 0}) == 2.0
    assert eval_numeric(PI, {}) == 3.141592653589793
    assert eval_numeric(P("r*cos(phi)"), {r: 2.0, phi: 0.0}) == 2.0


def test_eval_domain_errors():
    with pytest.raises(DomainError):
        eval_numeric(P("1/r"), {"r": 0})
    with pytest.raises(DomainError):
        eval_numeric(sqrt(r), {"r": -1})


def test_eval_unbound_symbol_is_named():
    with pytest.raises(UnboundSymbolError, match="phi"):
        eval_numeric(P("r*phi"), {"r": 1})


def test_eval_field_oracle():
    d = differentiate(U, r)
    e = P("2*U(r, phi, z)") + d
    assert eval_numeric(e, {"r": 1, "phi": 0, "z": 0}, {U: 3.0, d: 0.5}) == 6.5
    with pytest.raises(UnboundSymbolError):
        eval_numeric(e, {"r": 1, "phi": 0, "z": 0}, {U: 3.0})


def test_lambdify_matches_eval():
    e = P("r^2*sin(phi) + sqrt(z)")
    f = lambdify([e], ["r", "phi", "z"])
    got = f(1.5, 0.3, 2.0)[0]
    assert math.isclose(got, eval_numeric(e, {"r": 1.5, "phi": 0.3, "z": 2.0}), rel_tol=1e-14)
