"""Floating-point evaluation of expressions."""
from __future__ import annotations

import math
from typing import Callable, Mapping, Sequence, Union

from .expr import (
    Cos,
    DomainError,
    Expr,
    FieldFunction,
    Integer,
    PartialDerivative,
    PiConstant,
    Power,
    Product,
    Rational,
    Sin,
    Sqrt,
    Sum,
    Symbol,
)


class UnboundSymbolError(KeyError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"unbound symbol: {self.name}"


FieldOracle = Union[Mapping[Expr, float], Callable[[Expr, Mapping[str, float]], float]]


def _pow(b: float, e: float) -> float:
    if b == 0.0 and e < 0:
        raise DomainError("zero to a negative power")
    if b < 0 and not float(e).is_integer():
        raise DomainError("negative base with fractional exponent")
    try:
        return b**e
    except OverflowError as exc:
        raise DomainError(str(exc)) from exc


def _sqrt(x: float) -> float:
    if x < 0:
        raise DomainError(f"sqrt of negative value {x!r}")
    return math.sqrt(x)


def _lookup_field(node: Expr, bindings: Mapping[str, float], oracle) -> float:
    if oracle is None:
        raise UnboundSymbolError(_field_label(node))
    if callable(oracle) and not isinstance(oracle, Mapping):
        return float(oracle(node, bindings))
    try:
        return float(oracle[node])
    except KeyError:
        raise UnboundSymbolError(_field_label(node)) from None


def _field_label(node: Expr) -> str:
    from fieldcalc.render import render

    return render(node)


def _normalize_bindings(bindings: Mapping) -> dict[str, float]:
    return {(k.name if isinstance(k, Symbol) else k): float(v) for k, v in bindings.items()}


def eval_numeric(
    e: Expr,
    bindings: Mapping[Union[str, Symbol], float] | None = None,
    field_oracle: FieldOracle | None = None,
) -> float:
    """Evaluate ``e`` in IEEE double precision.

    ``field_oracle`` supplies values for field functions and their derivative
    nodes, either as a mapping keyed by node or as a callable
    ``oracle(node, bindings)``.
    """
    env = _normalize_bindings(bindings or {})
    memo: dict[int, float] = {}

    def ev(n: Expr) -> float:
        k = id(n)
        if k in memo:
            return memo[k]
        t = type(n)
        if t is Integer:
            v = float(n.value)
        elif t is Rational:
            v = n.num / n.den
        elif t is PiConstant:
            v = math.pi
        elif t is Symbol:
            try:
                v = env[n.name]
            except KeyError:
                raise UnboundSymbolError(n.name) from None
        elif t is FieldFunction or t is PartialDerivative:
            v = _lookup_field(n, env, field_oracle)
        elif t is Sum:
            v = math.fsum(ev(a) for a in n.terms)
        elif t is Product:
            v = 1.0
            for a in n.factors:
                v *= ev(a)
        elif t is Power:
            v = _pow(ev(n.base), ev(n.exp))
        elif t is Sin:
            v = math.sin(ev(n.arg))
        elif t is Cos:
            v = math.cos(ev(n.arg))
        elif t is Sqrt:
            v = _sqrt(ev(n.arg))
        else:  # pragma: no cover
            raise TypeError(f"cannot evaluate {t.__name__}")
        memo[k] = v
        return v

    try:
        return ev(e)
    except ZeroDivisionError as exc:
        raise DomainError("division by zero") from exc
    except OverflowError as exc:
        raise DomainError(str(exc)) from exc


def lambdify(
    exprs: Sequence[Expr], names: Sequence[str]
) -> Callable[..., list[float]]:
    """Compile expressions into one Python function of ``names``.

    Each distinct subtree becomes a single assignment, so deep or shared
    expressions compile to straight-line code.  Field nodes are looked up
    through an ``oracle`` keyword argument (same contract as ``eval_numeric``).
    """
    lines: list[str] = []
    slots: dict[Expr, str] = {}
    consts: dict[str, object] = {"_pow": _pow, "_sqrt": _sqrt, "_sin": math.sin,
                                 "_cos": math.cos, "_field": _lookup_field}
    fields: list[Expr] = []

    def name_of(n: Expr) -> str:
        s = slots.get(n)
        if s is not None:
            return s
        t = type(n)
        if t is Integer:
            code = repr(float(n.value))
        elif t is Rational:
            code = repr(n.num / n.den)
        elif t is PiConstant:
            code = repr(math.pi)
        elif t is Symbol:
            if n.name not in names:
                raise UnboundSymbolError(n.name)
            code = f"_a[{list(names).index(n.name)}]"
        elif t is FieldFunction or t is PartialDerivative:
            fields.append(n)
            code = f"_field(_F[{len(fields) - 1}], _env, oracle)"
        elif t is Sum:
            code = " + ".join(name_of(a) for a in n.terms)
        elif t is Product:
            code = " * ".join(name_of(a) for a in n.factors)
        elif t is Power:
            code = f"_pow({name_of(n.base)}, {name_of(n.exp)})"
        elif t is Sin:
            code = f"_sin({name_of(n.arg)})"
        elif t is Cos:
            code = f"_cos({name_of(n.arg)})"
        elif t is Sqrt:
            code = f"_sqrt({name_of(n.arg)})"
        else:  # pragma: no cover
            raise TypeError(t.__name__)
        s = f"t{len(slots)}"
        slots[n] = s
        lines.append(f"    {s} = {code}")
        return s

    outs = [name_of(e) for e in exprs]
    src = ["def _compiled(*_a, oracle=None):"]
    src.append(f"    _env = dict(zip({tuple(names)!r}, _a))")
    src.extend(lines)
    src.append(f"    return [{', '.join(outs)}]")
    consts["_F"] = fields
    ns: dict = {}
    exec(compile("\n".join(src), "<fieldcalc-lambdify>", "exec"), consts, ns)
    raw = ns["_compiled"]

    def fn(*values: float, oracle: FieldOracle | None = None) -> list[float]:
        try:
            return raw(*(float(v) for v in values), oracle=oracle)
        except ZeroDivisionError as exc:
            raise DomainError("division by zero") from exc
        except OverflowError as exc:
            raise DomainError(str(exc)) from exc

    return fn
