"""Expression grammar, chart files and the render/parse round trip."""
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fieldcalc.builtin_charts import chart_source
from fieldcalc.parser import ChartError, ParseError, parse_chart, parse_expression as P
from fieldcalc.render import render
from fieldcalc.symkernel import (
    ONE,
    Cos,
    DomainError,
    FieldFunction,
    PartialDerivative,
    Product,
    Symbol,
    add,
    cos,
    mul,
    neg,
    number,
    power,
    simplify,
    sin,
)

from conftest import closed_exprs, random_expr_text

a, b, c, r, phi = (Symbol(n) for n in ("a", "b", "c", "r", "phi"))


def test_product_with_cos():
    e = P("r*cos(phi)")
    assert isinstance(e, Product)
    assert set(e.factors) == {r, Cos(phi)}


def test_pythagorean_text_simplifies():
    assert simplify(P("sin(alpha)^2 + cos(alpha)^2")) == ONE


def test_precedence():
    assert P("a+b*c") == add(a, mul(b, c))
    assert P("a^b^c") == power(a, power(b, c))
    assert P("-a^2") == neg(power(a, number(2)))
    assert P("a-b-c") == add(a, neg(b), neg(c))
    assert P("a/b/c") == mul(a, power(b, number(-1)), power(c, number(-1)))
    assert P("2^-1") == number(Fraction(1, 2))


def test_decimals_are_exact():
    assert P("0.5") == number(Fraction(1, 2))
    assert P("1.25*r") == mul(number(Fraction(5, 4)), r)


def test_pi_and_tan():
    assert P("sin(pi/6)") == number(Fraction(1, 2))
    assert P("tan(phi)") == mul(sin(phi), power(cos(phi), number(-1)))


def test_field_functions_and_diff():
    assert P("U(r, phi)") == FieldFunction("U", [r, phi])
    d = P("diff(U(r, phi), phi, r, r)")
    assert isinstance(d, PartialDerivative)
    assert d.orders == (2, 1)


def test_syntax_error_offset():
    with pytest.raises(ParseError) as info:
        P("2*^3")
    assert info.value.offset == 2
    assert "number" in info.value.expected and "identifier" in info.value.expected


@pytest.mark.parametrize("text, offset", [
    ("sin(x", 5),
    ("x+", 2),
    ("3 4", 2),
    ("a @ b", 2),
    ("", 0),
    ("(a))", 3),
])
def test_error_offsets(text, offset):
    with pytest.raises(ParseError) as info:
        P(text)
    assert info.value.offset == offset


def test_field_arguments_must_be_distinct_names():
    with pytest.raises(ParseError):
        P("U(r, r)")
    with pytest.raises(ParseError):
        P("U(2*r)")
    with pytest.raises(ParseError):
        P("diff(x, r)")


# -- charts -------------------------------------------------------------------


def test_shifted_cylinder_chart():
    spec = parse_chart(chart_source("shifted-cylinder"), "shifted")
    assert spec.parameters == ("alpha",)
    assert spec.coordinate_names == ("r", "phi", "z")
    assert spec.map_exprs[1] == P("r*sin(phi) + z*sin(alpha)")
    assert spec.metric_exprs is None


def test_chart_with_metric():
    lines = ["coordinates: r, phi, z", "assume: r > 0"]
    for i in range(1, 4):
        for j in range(1, 4):
            v = "0" if i != j else ("1/r^2" if i == 2 else "1")
            lines.append(f"metric.contra.{i}.{j} = {v}")
    spec = parse_chart("\n".join(lines))
    assert spec.map_exprs is None
    assert spec.metric_variance == "contravariant"
    assert spec.metric_exprs[1][1] == P("1/r^2")
    assert spec.assumptions.is_positive_symbol("r")


MAP = "map.x = r*cos(phi)\nmap.y = r*sin(phi)\nmap.z = z\n"


@pytest.mark.parametrize("text, line, fragment", [
    ("coordinates: r, phi, z\ncoordinates: a, b, c\n" + MAP, 2, "duplicate"),
    ("coordinates: r, phi, z\nmap.x = beta*r\nmap.y = phi\nmap.z = z\n", 2, "beta"),
    ("coordinates: r, phi, z\n" + MAP + "metric.contra.1.1 = 1\n", 5, "both"),
    ("coordinates: r, phi, z\nfoo bar\n" + MAP, 2, "malformed"),
    ("coordinates: r, phi, z\nmap.x = r*\nmap.y = phi\nmap.z = z\n", 2, "offset"),
    ("coordinates: r, r, z\n" + MAP, 1, "distinct"),
])
def test_chart_errors_carry_line_numbers(text, line, fragment):
    with pytest.raises(ChartError) as info:
        parse_chart(text)
    assert info.value.line == line
    assert fragment in str(info.value)


def test_chart_without_map_or_metric():
    with pytest.raises(ChartError, match="neither"):
        parse_chart("coordinates: r, phi, z\n")


def test_asymmetric_metric_rejected():
    lines = ["coordinates: a, b, c"]
    for i in range(1, 4):
        for j in range(1, 4):
            v = "1" if i == j else ("a" if (i, j) == (1, 2) else "0")
            lines.append(f"metric.contra.{i}.{j} = {v}")
    with pytest.raises(ChartError, match="symmetric"):
        parse_chart("\n".join(lines))


def test_comments_and_blank_lines():
    text = "# torus-free test\n\ncoordinates: r, phi, z  # names\nassume: r > 0\n" + MAP
    assert parse_chart(text).coordinate_names == ("r", "phi", "z")


# -- round trip ---------------------------------------------------------------


def round_trip_texts(n: int, seed: int):
    """``n`` grammar-valid texts; those that divide by a literal zero are resampled."""
    rng = random.Random(seed)
    out, rejected = [], 0
    while len(out) < n:
        t = random_expr_text(rng)
        try:
            out.append((t, P(t)))
        except DomainError:
            rejected += 1
    return out, rejected


def test_round_trip_seeded_sample():
    cases, _ = round_trip_texts(300, 11)
    for text, e in cases:
        assert P(render(e)) == e, (text, render(e))


@settings(max_examples=200, deadline=None)
@given(closed_exprs)
def test_round_trip_generated_trees(e):
    assert P(render(e)) == e


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32))
def test_round_trip_random_grammar(seed):
    (text, e), = round_trip_texts(1, seed)[0]
    assert P(render(e)) == e
