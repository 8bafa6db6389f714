"""Differentiation and substitution over expression trees."""
from __future__ import annotations

from .expr import (
    MINUS_ONE,
    ONE,
    ZERO,
    Cos,
    Expr,
    FieldFunction,
    PartialDerivative,
    Power,
    Product,
    Sin,
    Sqrt,
    Sum,
    Symbol,
    add,
    cos,
    mul,
    number,
    power,
    rebuild,
    sin,
    HALF,
)


class SymbolicExponentError(ValueError):
    """Raised when differentiating ``b**e`` where ``e`` depends on the variable."""


def _bump(target: FieldFunction, orders: tuple, wrt: Symbol) -> Expr:
    try:
        i = target.params.index(wrt)
    except ValueError:
        return ZERO
    o = list(orders)
    o[i] += 1
    return PartialDerivative(target, tuple(o))


def differentiate(e: Expr, wrt: Symbol | str, times: int = 1) -> Expr:
    """Exact partial derivative of ``e`` with respect to ``wrt``.

    Sum, product and chain rules are applied eagerly; only opaque field
    functions keep a derivative node.
    """
    if isinstance(wrt, str):
        wrt = Symbol(wrt)
    for _ in range(times):
        e = _Differentiator(wrt).d(e)
    return e


class _Differentiator:
    def __init__(self, wrt: Symbol):
        self.wrt = wrt
        self.memo: dict[Expr, Expr] = {}

    def d(self, e: Expr) -> Expr:
        if self.wrt.name not in e.free_symbols:
            return ZERO
        hit = self.memo.get(e)
        if hit is not None:
            return hit
        out = self._d(e)
        self.memo[e] = out
        return out

    def _d(self, e: Expr) -> Expr:
        t = type(e)
        if t is Symbol:
            return ONE if e == self.wrt else ZERO
        if t is FieldFunction:
            return _bump(e, (0,) * len(e.params), self.wrt)
        if t is PartialDerivative:
            return _bump(e.target, e.orders, self.wrt)
        if t is Sum:
            return add(*(self.d(a) for a in e.terms))
        if t is Product:
            fs = e.factors
            terms = []
            for i, f in enumerate(fs):
                df = self.d(f)
                if df is ZERO or df == ZERO:
                    continue
                terms.append(mul(*fs[:i], df, *fs[i + 1 :]))
            return add(*terms)
        if t is Power:
            if self.wrt.name in e.exp.free_symbols:
                raise SymbolicExponentError(
                    f"exponent depends on {self.wrt.name}; logarithms are not supported"
                )
            return mul(e.exp, power(e.base, add(e.exp, MINUS_ONE)), self.d(e.base))
        if t is Sin:
            return mul(cos(e.arg), self.d(e.arg))
        if t is Cos:
            return mul(MINUS_ONE, sin(e.arg), self.d(e.arg))
        if t is Sqrt:
            return mul(HALF, power(e, MINUS_ONE), self.d(e.arg))
        return ZERO


def substitute(e: Expr, target: Symbol | str, replacement: Expr) -> Expr:
    """Replace every occurrence of ``target`` and re-canonicalize."""
    if isinstance(target, str):
        target = Symbol(target)
    if isinstance(replacement, int):
        replacement = number(replacement)
    memo: dict[Expr, Expr] = {}

    def go(n: Expr) -> Expr:
        if target.name not in n.free_symbols:
            return n
        hit = memo.get(n)
        if hit is not None:
            return hit
        t = type(n)
        if t is Symbol:
            out = replacement
        elif t is FieldFunction or t is PartialDerivative:
            out = _rename_field(n, target, replacement)
        else:
            out = rebuild(n, [go(a) for a in n.args])
        memo[n] = out
        return out

    return go(e)


def _rename_field(n: Expr, target: Symbol, replacement: Expr) -> Expr:
    if not isinstance(replacement, Symbol):
        raise ValueError(
            f"cannot substitute an expression for field argument {target.name}"
        )
    f = n if isinstance(n, FieldFunction) else n.target
    g = FieldFunction(f.name, [replacement if p == target else p for p in f.params])
    if isinstance(n, FieldFunction):
        return g
    return PartialDerivative(g, n.orders)


def subs(e: Expr, mapping: dict) -> Expr:
    """Sequentially apply ``substitute`` for each ``name -> expr`` pair."""
    for k, v in mapping.items():
        e = substitute(e, k, v)
    return e


__all__ = ["differentiate", "substitute", "subs", "SymbolicExponentError"]
