"""Symbolic kernel: expressions, calculus, normal form, zero testing."""
from .assumptions import Assumptions
from .calculus import SymbolicExponentError, differentiate, subs, substitute
from .evaluate import DomainError, UnboundSymbolError, eval_numeric, lambdify
from .expr import (
    HALF,
    MINUS_ONE,
    ONE,
    PI,
    TWO,
    ZERO,
    Cos,
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
    add,
    cos,
    div,
    mul,
    neg,
    number,
    power,
    sin,
    sqrt,
    sub,
    symbols,
    sympify,
    tan,
)
from .normal import Normalizer, normal_form, simplify
from .zero import ZeroResult, is_zero

__all__ = [name for name in dir() if not name.startswith("_")]
