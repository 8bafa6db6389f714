"""Expression grammar and the line-oriented chart file format.

Expressions use a Pratt parser::

    expr    := prefix (infix)*
    prefix  := NUMBER | IDENT | IDENT '(' args ')' | '(' expr ')' | '-' expr | '+' expr
    infix   := ('+' | '-' | '*' | '/' | '^') expr

``^`` is right-associative and binds tighter than unary minus, so ``-a^2``
is ``-(a^2)``. ``diff(U(r, phi, z), r, phi)`` builds a partial derivative
node, which keeps rendered text re-parseable.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .symkernel.assumptions import Assumptions
from .symkernel.calculus import differentiate
from .symkernel.evaluate import eval_numeric
from .symkernel.expr import (
    PI,
    Expr,
    FieldFunction,
    Symbol,
    add,
    cos,
    div,
    mul,
    neg,
    number,
    power,
    preorder,
    sin,
    sqrt,
    sub,
    tan,
)
from .symkernel.normal import is_structurally_zero

FUNCTIONS = {"sin": sin, "cos": cos, "tan": tan, "sqrt": sqrt}
RESERVED = set(FUNCTIONS) | {"pi", "diff"}

_TOKEN = re.compile(
    r"\s*(?:(?P<number>\d+\.\d*|\.\d+|\d+)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))"
)

_PREFIX_START = frozenset({"number", "identifier", "'('", "'-'", "'+'"})
_INFIX = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}
_UNARY_BP = 25


class ParseError(ValueError):
    """Syntax error at byte ``offset``; ``expected`` lists acceptable tokens."""

    def __init__(self, message: str, offset: int, expected: Iterable[str] = ()):
        self.offset = offset
        self.expected = frozenset(expected)
        detail = f" (expected one of: {', '.join(sorted(self.expected))})" if self.expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")


@dataclass(frozen=True)
class Token:
    kind: str  # number | ident | op | eof
    text: str
    offset: int


def tokenize(text: str) -> list[Token]:
    raw = text.encode("utf-8")
    if len(raw) != len(text):
        # report byte offsets even for non-ASCII input
        for i, ch in enumerate(text):
            if ord(ch) > 127:
                raise ParseError(f"unexpected character {ch!r}", len(text[:i].encode("utf-8")))
    out: list[Token] = []
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            out.append(Token("eof", "", n))
            return out
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, _PREFIX_START)
        kind = m.lastgroup
        start = m.start(kind)
        out.append(Token(kind, m.group(kind), start))
        pos = m.end()


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, op: str) -> Token:
        t = self.tok
        if t.kind != "op" or t.text != op:
            raise ParseError(f"unexpected {_describe(t)}", t.offset, {f"'{op}'"})
        return self.advance()

    def parse(self) -> Expr:
        e = self.expr(0)
        t = self.tok
        if t.kind != "eof":
            raise ParseError(f"unexpected {_describe(t)}", t.offset,
                             {f"'{k}'" for k in _INFIX} | {"end of input"})
        return e

    def expr(self, rbp: int) -> Expr:
        left = self.prefix()
        while True:
            t = self.tok
            if t.kind != "op" or t.text not in _INFIX:
                return left
            lbp = _INFIX[t.text]
            if lbp <= rbp:
                return left
            self.advance()
            if t.text == "^":
                right = self.expr(lbp - 1)
                left = power(left, right)
            else:
                right = self.expr(lbp)
                left = _BINARY[t.text](left, right)

    def prefix(self) -> Expr:
        t = self.advance()
        if t.kind == "number":
            return number(Fraction(t.text))
        if t.kind == "op" and t.text == "(":
            e = self.expr(0)
            self.expect(")")
            return e
        if t.kind == "op" and t.text == "-":
            return neg(self.expr(_UNARY_BP))
        if t.kind == "op" and t.text == "+":
            return self.expr(_UNARY_BP)
        if t.kind == "ident":
            return self.identifier(t)
        raise ParseError(f"unexpected {_describe(t)}", t.offset, _PREFIX_START)

    def identifier(self, t: Token) -> Expr:
        name = t.text
        called = self.tok.kind == "op" and self.tok.text == "("
        if name == "pi":
            if called:
                raise ParseError("'pi' is not a function", self.tok.offset,
                                 {f"'{k}'" for k in _INFIX} | {"end of input"})
            return PI
        if not called:
            if name in RESERVED:
                raise ParseError(f"function {name!r} needs an argument list", self.tok.offset, {"'('"})
            return Symbol(name)
        self.advance()
        if name in FUNCTIONS:
            arg = self.expr(0)
            self.expect(")")
            return FUNCTIONS[name](arg)
        if name == "diff":
            return self.derivative()
        params = [self.bare_identifier()]
        while self.tok.kind == "op" and self.tok.text == ",":
            self.advance()
            params.append(self.bare_identifier())
        self.expect(")")
        if len(set(params)) != len(params):
            raise ParseError(f"repeated argument in field function {name!r}", t.offset)
        return FieldFunction(name, tuple(params))

    def bare_identifier(self) -> Symbol:
        t = self.tok
        if t.kind != "ident" or t.text in RESERVED:
            raise ParseError(f"unexpected {_describe(t)}", t.offset, {"identifier"})
        self.advance()
        return Symbol(t.text)

    def derivative(self) -> Expr:
        start = self.tok.offset
        target = self.expr(0)
        if not isinstance(target, FieldFunction):
            raise ParseError("diff() target must be a field function", start)
        out: Expr = target
        while self.tok.kind == "op" and self.tok.text == ",":
            self.advance()
            out = differentiate(out, self.bare_identifier())
        self.expect(")")
        return out


def _describe(t: Token) -> str:
    return "end of input" if t.kind == "eof" else repr(t.text)


_BINARY = {"+": add, "-": sub, "*": mul, "/": div}


def parse_expression(text: str) -> Expr:
    """Parse ``text`` into a canonical expression.

    Examples
    --------
    >>> parse_expression("r*cos(phi)")
    r*cos(phi)
    """
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# chart files
# ---------------------------------------------------------------------------


class ChartError(ValueError):
    """Invalid chart file; ``line`` is 1-based (0 when not tied to a line)."""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class ChartSpec:
    """Validated content of a chart file.

    Exactly one of ``map_exprs`` (x, y, z in terms of the coordinates) and
    ``metric_exprs`` is set. ``metric_variance`` says whether the given
    metric is ``"contravariant"`` or ``"covariant"``.
    """

    coordinate_names: tuple[str, str, str]
    parameters: tuple[str, ...] = ()
    map_exprs: tuple[Expr, Expr, Expr] | None = None
    metric_exprs: tuple[tuple[Expr, ...], ...] | None = None
    metric_variance: str = "contravariant"
    assumptions: Assumptions = field(default_factory=Assumptions)
    name: str = "chart"

    def __post_init__(self):
        if (self.map_exprs is None) == (self.metric_exprs is None):
            raise ChartError("exactly one of map and metric must be given")
        if len(set(self.coordinate_names)) != 3:
            raise ChartError("need three distinct coordinate names")


_SECTION = re.compile(r"^(coordinates|parameters|assume)\s*:\s*(.*)$")
_MAP = re.compile(r"^map\.([xyz])\s*=\s*(.*)$")
_METRIC = re.compile(r"^metric\.(contra|co)\.([123])\.([123])\s*=\s*(.*)$")
_IDENT = re.compile(r"^[A-Za-z_][A-Za-z_0-9]*$")


def _split_names(text: str, lineno: int) -> list[str]:
    names = [p.strip() for p in text.split(",")] if text.strip() else []
    for n in names:
        if not _IDENT.match(n) or n in RESERVED:
            raise ChartError(f"malformed identifier {n!r}", lineno)
    return names


def _expr_at(text: str, lineno: int) -> Expr:
    try:
        return parse_expression(text)
    except ParseError as exc:
        raise ChartError(f"malformed expression: {exc}", lineno) from None


def _constant(e: Expr, lineno: int) -> float:
    if e.free_symbols:
        raise ChartError("interval bounds must be constants", lineno)
    return eval_numeric(e, {})


def _assume(text: str, lineno: int):
    """One fact: ``expr > 0``, ``0 < sym``, ``lo < sym < hi`` (``>`` chains too)."""
    parts = re.split(r"(<|>)", text)
    if len(parts) not in (3, 5):
        raise ChartError(f"malformed assumption {text.strip()!r}", lineno)
    ops = parts[1::2]
    if len(set(ops)) != 1:
        raise ChartError(f"mixed comparison directions in {text.strip()!r}", lineno)
    exprs = [_expr_at(p, lineno) for p in parts[0::2]]
    if ops[0] == ">":
        exprs.reverse()
    # now exprs[0] < exprs[1] (< exprs[2])
    if len(exprs) == 3:
        lo, mid, hi = exprs
        if not isinstance(mid, Symbol):
            raise ChartError("a two-sided bound must enclose a single symbol", lineno)
        return ("interval", mid.name, _constant(lo, lineno), _constant(hi, lineno))
    lo, hi = exprs
    if not lo.free_symbols:
        if isinstance(hi, Symbol):
            return ("interval", hi.name, _constant(lo, lineno), math.inf)
        if _constant(lo, lineno) == 0:
            return ("positive", hi)
    elif not hi.free_symbols:
        if isinstance(lo, Symbol):
            return ("interval", lo.name, -math.inf, _constant(hi, lineno))
    raise ChartError(f"unsupported assumption {text.strip()!r}", lineno)


def _symbols_in(e: Expr) -> set[str]:
    return set(e.free_symbols)


def _has_field(e: Expr) -> bool:
    return any(isinstance(n, FieldFunction) for n in preorder(e))


def parse_chart(text: str, name: str = "chart") -> ChartSpec:
    """Parse and validate a chart file.

    Format (``#`` starts a comment)::

        coordinates: r, phi, z
        parameters: alpha
        assume: r > 0
        map.x = r*cos(phi)
        map.y = r*sin(phi) + z*sin(alpha)
        map.z = z*cos(alpha)

    Instead of ``map.*`` a chart may give all nine ``metric.contra.i.j``
    (or ``metric.co.i.j``) entries. Several facts may share an ``assume:``
    line separated by commas, and ``assume:`` may be repeated.
    """
    coords: list[str] | None = None
    params: list[str] | None = None
    param_line = 0
    facts: list[tuple[int, tuple]] = []
    mapping: dict[str, tuple[int, Expr]] = {}
    metric: dict[tuple[int, int], tuple[int, Expr]] = {}
    variance: str | None = None
    first_metric_line = first_map_line = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            key, rest = m.groups()
            if key == "coordinates":
                if coords is not None:
                    raise ChartError("duplicate section 'coordinates'", lineno)
                coords = _split_names(rest, lineno)
                if len(coords) != 3 or len(set(coords)) != 3:
                    raise ChartError("need exactly three distinct coordinates", lineno)
            elif key == "parameters":
                if params is not None:
                    raise ChartError("duplicate section 'parameters'", lineno)
                params, param_line = _split_names(rest, lineno), lineno
            else:
                for piece in split_top_level(rest):
                    facts.append((lineno, _assume(piece, lineno)))
            continue
        m = _MAP.match(line)
        if m:
            axis, rhs = m.groups()
            if axis in mapping:
                raise ChartError(f"duplicate entry 'map.{axis}'", lineno)
            mapping[axis] = (lineno, _expr_at(rhs, lineno))
            first_map_line = first_map_line or lineno
            continue
        m = _METRIC.match(line)
        if m:
            var, i, j, rhs = m.groups()
            var = "contravariant" if var == "contra" else "covariant"
            if variance is not None and var != variance:
                raise ChartError("metric entries mix covariant and contravariant", lineno)
            variance = var
            key = (int(i) - 1, int(j) - 1)
            if key in metric:
                raise ChartError(f"duplicate entry 'metric.{m.group(1)}.{i}.{j}'", lineno)
            metric[key] = (lineno, _expr_at(rhs, lineno))
            first_metric_line = first_metric_line or lineno
            continue
        raise ChartError(f"malformed line {line!r}", lineno)

    if coords is None:
        raise ChartError("missing section 'coordinates'")
    params = params or []
    clash = set(coords) & set(params)
    if clash:
        raise ChartError(f"{sorted(clash)[0]!r} is both a coordinate and a parameter", param_line)
    known = set(coords) | set(params)

    if mapping and metric:
        raise ChartError("chart gives both a map and a metric", max(first_map_line, first_metric_line))
    if not mapping and not metric:
        raise ChartError("chart gives neither a map nor a metric")

    def check(e: Expr, lineno: int) -> None:
        unknown = _symbols_in(e) - known
        if unknown:
            raise ChartError(f"unknown symbol {sorted(unknown)[0]!r} (coordinates: "
                             f"{', '.join(coords)}; parameters: {', '.join(params) or 'none'})", lineno)
        if _has_field(e):
            raise ChartError("field functions are not allowed in a chart", lineno)

    map_exprs = metric_exprs = None
    if mapping:
        for axis in "xyz":
            if axis not in mapping:
                raise ChartError(f"missing entry 'map.{axis}'", max(ln for ln, _ in mapping.values()))
        for lineno, e in mapping.values():
            check(e, lineno)
        map_exprs = tuple(mapping[a][1] for a in "xyz")
    else:
        last = max(ln for ln, _ in metric.values())
        for i in range(3):
            for j in range(3):
                if (i, j) not in metric:
                    tag = "contra" if variance == "contravariant" else "co"
                    raise ChartError(f"missing entry 'metric.{tag}.{i + 1}.{j + 1}'", last)
        for lineno, e in metric.values():
            check(e, lineno)
        for i in range(3):
            for j in range(i + 1, 3):
                (la, a), (lb, b) = metric[(i, j)], metric[(j, i)]
                if a != b and not is_structurally_zero(sub(a, b)):
                    raise ChartError(f"metric is not symmetric in entries ({i + 1},{j + 1}) "
                                     f"and ({j + 1},{i + 1})", max(la, lb))
        metric_exprs = tuple(tuple(metric[(i, j)][1] for j in range(3)) for i in range(3))

    positive: set[str] = set()
    intervals: list[tuple[str, float, float]] = []
    positive_exprs: list[Expr] = []
    for lineno, fact in facts:
        if fact[0] == "interval":
            _, sym, lo, hi = fact
            if sym not in known:
                raise ChartError(f"unknown symbol {sym!r} in assumption", lineno)
            if not lo < hi:
                raise ChartError(f"empty interval for {sym!r}", lineno)
            if lo >= 0 and hi == math.inf:
                positive.add(sym)
            else:
                intervals.append((sym, lo, hi))
        else:
            e = fact[1]
            check(e, lineno)
            if isinstance(e, Symbol):
                positive.add(e.name)
            else:
                positive_exprs.append(e)
    assumptions = Assumptions(frozenset(positive), tuple(intervals), tuple(positive_exprs))

    return ChartSpec(
        coordinate_names=tuple(coords),
        parameters=tuple(params),
        map_exprs=map_exprs,
        metric_exprs=metric_exprs,
        metric_variance=variance or "contravariant",
        assumptions=assumptions,
        name=name,
    )


def split_top_level(text: str) -> list[str]:
    """Split on commas that are not inside parentheses."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return [p for p in (s.strip() for s in out) if p]

