"""Normalized grad/div/curl/laplacian/dot/cross."""
import random

import numpy as np
import pytest

from fieldcalc.builtin_charts import builtin_chart
from fieldcalc.parser import parse_expression as P
from fieldcalc.symkernel import (
    ZERO,
    ZeroResult,
    add,
    differentiate,
    div as sdiv,
    eval_numeric,
    is_zero,
    lambdify,
    mul,
    number,
    sub,
)
from fieldcalc.symkernel.zero import PointSampler, angle_symbols
from fieldcalc.vectorops import (
    ChartMismatchError,
    ScalarField,
    VectorField,
    cross,
    curl,
    div,
    dot,
    grad,
    laplacian,
    scalar,
    vector,
)

CART = builtin_chart("cartesian")
CYL = builtin_chart("cylinder")
SPH = builtin_chart("sphere")
SHIFT3 = builtin_chart("shifted-cylinder").with_parameters({"alpha": "pi/3"})


def zero(e, chart):
    return is_zero(e, 0, chart.assumptions) is ZeroResult.PROVED_ZERO


def nonzero(e, chart):
    return is_zero(e, 0, chart.assumptions) is ZeroResult.PROVED_NONZERO


def same(a, b, chart):
    return zero(sub(a, b), chart)


def d(e, *names):
    for n in names:
        e = differentiate(e, n)
    return e


def points(chart, exprs, n, seed):
    s = PointSampler(chart.symbols, chart.assumptions, angle_symbols(exprs), random.Random(seed))
    return [s.draw() for _ in range(n)]


# -- grad -----------------------------------------------------------------------


def test_grad_cartesian():
    U = scalar(CART, "U")
    assert grad(U).components == tuple(d(U.expr, q) for q in "xyz")


def test_grad_cylinder():
    U = scalar(CYL, "U")
    g = grad(U).components
    assert g[0] == d(U.expr, "r")
    assert same(g[1], sdiv(d(U.expr, "phi"), P("r")), CYL)
    assert g[2] == d(U.expr, "z")


def test_grad_shifted_matches_chain_rule_oracle():
    # Cartesian gradient of U(map), expanded in the unit covariant basis
    U = P("r^2*z*cos(phi)")
    G = grad(ScalarField(U, SHIFT3)).components
    names = ["r", "phi", "z"]
    fmap = lambdify(SHIFT3.map_exprs, names)
    fu = lambdify([U], names)
    fg = lambdify(G, names)
    h = 1e-4
    for env in points(SHIFT3, list(SHIFT3.map_exprs), 20, 3):
        xi = np.array([env[n] for n in names])
        M = np.zeros((3, 3))
        du = np.zeros(3)
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            f = lambda v: np.array(fmap(*v))
            M[:, i] = (-f(xi + 2 * e) + 8 * f(xi + e) - 8 * f(xi - e) + f(xi - 2 * e)) / (12 * h)
            u = lambda v: fu(*v)[0]
            du[i] = (-u(xi + 2 * e) + 8 * u(xi + e) - 8 * u(xi - e) + u(xi - 2 * e)) / (12 * h)
        cart = np.linalg.solve(M.T, du)
        unit = M / np.linalg.norm(M, axis=0)
        want = np.linalg.solve(unit, cart)
        got = np.array(fg(*xi))
        assert np.linalg.norm(got - want) / max(np.linalg.norm(want), 1.0) <= 1e-6


# -- div ------------------------------------------------------------------------


def test_div_cartesian():
    A = vector(CART, ["A_x", "A_y", "A_z"])
    assert div(A).expr == add(*(d(c, q) for c, q in zip(A, "xyz")))


def test_div_cylinder_correct_form():
    A = vector(CYL, ["A_r", "A_phi", "A_z"])
    r = P("r")
    want = add(sdiv(d(mul(r, A[0]), "r"), r), sdiv(d(A[1], "phi"), r), d(A[2], "z"))
    assert same(div(A).expr, want, CYL)


def test_div_cylinder_wrong_form_is_rejected():
    A = vector(CYL, ["A_r", "A_phi", "A_z"])
    r2 = P("r^2")
    wrong = sdiv(add(*(d(mul(r2, c), q) for c, q in zip(A, ["r", "phi", "z"]))), r2)
    assert nonzero(sub(div(A).expr, wrong), CYL)


def test_div_of_position_field():
    assert div(vector(CART, ["x", "y", "z"])).expr == number(3)


# -- curl -----------------------------------------------------------------------


def test_curl_cartesian():
    A = vector(CART, ["A_x", "A_y", "A_z"])
    c = curl(A).components
    assert c[0] == sub(d(A[2], "y"), d(A[1], "z"))
    assert c[1] == sub(d(A[0], "z"), d(A[2], "x"))
    assert c[2] == sub(d(A[1], "x"), d(A[0], "y"))


def test_curl_cylinder_third_component():
    A = vector(CYL, ["A_r", "A_phi", "A_z"])
    r = P("r")
    want = sdiv(sub(d(mul(r, A[1]), "r"), d(A[0], "phi")), r)
    assert same(curl(A)[2], want, CYL)


@pytest.mark.parametrize("chart", [CYL, SPH, builtin_chart("toroidal"), SHIFT3],
                         ids=["cylinder", "sphere", "toroidal", "shifted@pi/3"])
def test_curl_grad_and_div_curl_vanish(chart):
    U = scalar(chart, "U")
    A = vector(chart, [f"A_{q.name}" for q in chart.coordinates])
    assert all(c == ZERO or zero(c, chart) for c in curl(grad(U)))
    assert zero(div(curl(A)).expr, chart)


# -- laplacian -------------------------------------------------------------------


def test_laplacian_cartesian():
    U = scalar(CART, "U")
    assert laplacian(U).expr == add(*(d(U.expr, q, q) for q in "xyz"))


def test_laplacian_cylinder():
    U = scalar(CYL, "U").expr
    r = P("r")
    want = add(sdiv(d(mul(r, d(U, "r")), "r"), r), sdiv(d(U, "phi", "phi"), P("r^2")), d(U, "z", "z"))
    assert same(laplacian(scalar(CYL, "U")).expr, want, CYL)


def test_laplacian_sphere():
    U = scalar(SPH, "U").expr
    r2, s = P("r^2"), P("sin(theta)")
    want = add(
        sdiv(d(mul(r2, d(U, "r")), "r"), r2),
        sdiv(d(mul(s, d(U, "theta")), "theta"), mul(r2, s)),
        sdiv(d(U, "phi", "phi"), mul(r2, s, s)),
    )
    assert same(laplacian(scalar(SPH, "U")).expr, want, SPH)


def test_laplacian_is_div_grad():
    U = scalar(SHIFT3, "U")
    assert same(laplacian(U).expr, div(grad(U)).expr, SHIFT3)


# -- linearity ----------------------------------------------------------------------


@pytest.mark.parametrize("chart", [CYL, SHIFT3], ids=["cylinder", "shifted@pi/3"])
def test_linearity(chart):
    a = number(3)
    U, V = scalar(chart, "U"), scalar(chart, "V")
    W = ScalarField(add(mul(a, U.expr), V.expr), chart)
    for lhs, u, v in zip(grad(W), grad(U), grad(V)):
        assert same(lhs, add(mul(a, u), v), chart)
    names = [q.name for q in chart.coordinates]
    A = vector(chart, [f"A_{n}" for n in names])
    B = vector(chart, [f"B_{n}" for n in names])
    C = VectorField(tuple(add(mul(a, x), y) for x, y in zip(A, B)), chart)
    assert same(div(C).expr, add(mul(a, div(A).expr), div(B).expr), chart)
    for lhs, x, y in zip(curl(C), curl(A), curl(B)):
        assert same(lhs, add(mul(a, x), y), chart)


# -- dot and cross ----------------------------------------------------------------


def test_dot_cartesian_and_orthogonal():
    for ch in (CART, CYL, SPH):
        n = [q.name for q in ch.coordinates]
        A = vector(ch, [f"A_{x}" for x in n])
        B = vector(ch, [f"B_{x}" for x in n])
        assert same(dot(A, B).expr, add(*(mul(a, b) for a, b in zip(A, B))), ch)
        assert dot(A, B).expr == dot(B, A).expr


def test_dot_shifted_matches_push_forward():
    phys = [P("r*z"), P("r^2"), P("z*sin(phi)")]
    A = VectorField(tuple(phys), SHIFT3)
    AA = dot(A, A).expr
    names = ["r", "phi", "z"]
    jac = [[differentiate(x, q) for q in names] for x in SHIFT3.map_exprs]
    for env in points(SHIFT3, list(SHIFT3.map_exprs), 10, 4):
        M = np.array([[eval_numeric(x, env) for x in row] for row in jac])
        unit = M / np.linalg.norm(M, axis=0)
        v = unit @ np.array([eval_numeric(p, env) for p in phys])
        want = float(v @ v)
        assert abs(eval_numeric(AA, env) - want) <= 1e-8 * max(abs(want), 1.0)


def test_cross_cartesian():
    A = vector(CART, ["A_x", "A_y", "A_z"])
    B = vector(CART, ["B_x", "B_y", "B_z"])
    c = cross(A, B).components
    assert c[0] == sub(mul(A[1], B[2]), mul(A[2], B[1]))
    assert c[1] == sub(mul(A[2], B[0]), mul(A[0], B[2]))
    assert c[2] == sub(mul(A[0], B[1]), mul(A[1], B[0]))


@pytest.mark.parametrize("chart", [CART, CYL, SPH, builtin_chart("toroidal"), SHIFT3,
                                   builtin_chart("shifted-cylinder")],
                         ids=["cartesian", "cylinder", "sphere", "toroidal", "shifted@pi/3",
                              "shifted"])
def test_cross_properties(chart):
    n = [q.name for q in chart.coordinates]
    A = vector(chart, [f"A_{x}" for x in n])
    B = vector(chart, [f"B_{x}" for x in n])
    assert all(c == ZERO for c in cross(A, A))
    AB, BA = cross(A, B), cross(B, A)
    assert all(zero(add(x, y), chart) for x, y in zip(AB, BA))
    assert zero(dot(AB, A).expr, chart)
    assert zero(dot(AB, B).expr, chart)


def test_chart_mismatch():
    A = vector(CYL, ["A_r", "A_phi", "A_z"])
    B = vector(SPH, ["B_r", "B_t", "B_p"])
    with pytest.raises(ChartMismatchError):
        dot(A, B)
    with pytest.raises(ChartMismatchError):
        cross(A, B)


def test_field_symbols_are_checked():
    with pytest.raises(ValueError, match="coordinates"):
        ScalarField(P("beta*r"), CYL)
    with pytest.raises(ValueError):
        VectorField((P("r"), P("z")), CYL)
