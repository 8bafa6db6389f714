"""Immutable expression trees with canonical construction.

Nodes are never built directly by user code; the constructor functions
``add``, ``mul``, ``power``, ``sin``, ``cos`` and ``sqrt`` (and the operator
overloads on :class:`Expr`) flatten, fold numbers, collect like terms and
sort operands, so two constructions of the same sum or product compare equal.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Union

Number = Union[int, Fraction]

# rank of each node class inside the canonical total order
_RANK_NUMBER = 0
_RANK_PI = 1
_RANK_SYMBOL = 2
_RANK_FIELD = 3
_RANK_DERIV = 4
_RANK_SIN = 5
_RANK_COS = 6
_RANK_SQRT = 7
_RANK_POWER = 8
_RANK_PRODUCT = 9
_RANK_SUM = 10


class DomainError(ArithmeticError):
    """Division by zero or square root of a negative number."""


class Expr:
    __slots__ = ("_hash", "_key", "_free")

    def _fields(self) -> tuple:
        raise NotImplementedError

    @property
    def args(self) -> tuple:
        """Child expressions, in canonical order."""
        return ()

    # structural identity -------------------------------------------------
    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if type(self) is not type(other):
            return False
        if hash(self) != hash(other):
            return False
        return self._fields() == other._fields()

    def __ne__(self, other: object) -> bool:
        return not self.__eq__(other)

    def __hash__(self) -> int:
        try:
            return self._hash
        except AttributeError:
            h = hash((type(self).__name__, self._fields()))
            self._hash = h
            return h

    @property
    def sort_key(self) -> tuple:
        try:
            return self._key
        except AttributeError:
            k = self._make_key()
            self._key = k
            return k

    def _make_key(self) -> tuple:
        raise NotImplementedError

    @property
    def free_symbols(self) -> frozenset:
        """Names of every symbol the expression depends on."""
        try:
            return self._free
        except AttributeError:
            out: frozenset = frozenset()
            for a in self.args:
                out = out | a.free_symbols
            self._free = out
            return out

    # arithmetic ------------------------------------------------------------
    def __add__(self, other):
        return add(self, sympify(other))

    def __radd__(self, other):
        return add(sympify(other), self)

    def __sub__(self, other):
        return add(self, neg(sympify(other)))

    def __rsub__(self, other):
        return add(sympify(other), neg(self))

    def __mul__(self, other):
        return mul(self, sympify(other))

    def __rmul__(self, other):
        return mul(sympify(other), self)

    def __truediv__(self, other):
        return mul(self, power(sympify(other), MINUS_ONE))

    def __rtruediv__(self, other):
        return mul(sympify(other), power(self, MINUS_ONE))

    def __pow__(self, other):
        return power(self, sympify(other))

    def __rpow__(self, other):
        return power(sympify(other), self)

    def __neg__(self):
        return neg(self)

    def __pos__(self):
        return self

    def __repr__(self) -> str:
        from fieldcalc.render import render

        return f"<{type(self).__name__} {render(self)}>"

    def __str__(self) -> str:
        from fieldcalc.render import render

        return render(self)


# ---------------------------------------------------------------------------
# atoms
# ---------------------------------------------------------------------------


class Integer(Expr):
    __slots__ = ("value",)

    def __init__(self, value: int):
        self.value = int(value)

    def _fields(self):
        return (self.value,)

    def _make_key(self):
        return (_RANK_NUMBER, Fraction(self.value))

    @property
    def free_symbols(self):
        return frozenset()

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.value)


class Rational(Expr):
    """Non-integer rational constant in lowest terms, positive denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num: int, den: int):
        self.num = num
        self.den = den

    def _fields(self):
        return (self.num, self.den)

    def _make_key(self):
        return (_RANK_NUMBER, Fraction(self.num, self.den))

    @property
    def free_symbols(self):
        return frozenset()

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.num, self.den)


class PiConstant(Expr):
    __slots__ = ()

    def _fields(self):
        return ()

    def _make_key(self):
        return (_RANK_PI,)

    @property
    def free_symbols(self):
        return frozenset()


class Symbol(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def _fields(self):
        return (self.name,)

    def _make_key(self):
        return (_RANK_SYMBOL, self.name)

    @property
    def free_symbols(self):
        return frozenset((self.name,))


class FieldFunction(Expr):
    """An undetermined function of coordinate symbols, such as ``U(r, phi, z)``."""

    __slots__ = ("name", "params")

    def __init__(self, name: str, params: Iterable[Symbol | str]):
        self.name = name
        self.params = tuple(p if isinstance(p, Symbol) else Symbol(p) for p in params)
        if len(set(self.params)) != len(self.params):
            raise ValueError(f"field {name!r} has repeated arguments")

    @property
    def args(self):
        return self.params

    def _fields(self):
        return (self.name, self.params)

    def _make_key(self):
        return (_RANK_FIELD, self.name, tuple(p.name for p in self.params))


class PartialDerivative(Expr):
    """Mixed partial derivative of a field function.

    ``orders[i]`` is how many times the target is differentiated with respect
    to ``target.params[i]``; the order of differentiation is irrelevant.
    """

    __slots__ = ("target", "orders")

    def __init__(self, target: FieldFunction, orders: tuple[int, ...]):
        self.target = target
        self.orders = tuple(orders)

    @property
    def args(self):
        return (self.target,)

    def _fields(self):
        return (self.target, self.orders)

    def _make_key(self):
        return (_RANK_DERIV, self.target.sort_key, self.orders)

    @property
    def total_order(self) -> int:
        return sum(self.orders)


class _Unary(Expr):
    __slots__ = ("arg",)
    _rank = -1

    def __init__(self, arg: Expr):
        self.arg = arg

    @property
    def args(self):
        return (self.arg,)

    def _fields(self):
        return (self.arg,)

    def _make_key(self):
        return (self._rank, self.arg.sort_key)


class Sin(_Unary):
    __slots__ = ()
    _rank = _RANK_SIN


class Cos(_Unary):
    __slots__ = ()
    _rank = _RANK_COS


class Sqrt(_Unary):
    __slots__ = ()
    _rank = _RANK_SQRT


class Power(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base: Expr, exp: Expr):
        self.base = base
        self.exp = exp

    @property
    def args(self):
        return (self.base, self.exp)

    def _fields(self):
        return (self.base, self.exp)

    def _make_key(self):
        return (_RANK_POWER, self.base.sort_key, self.exp.sort_key)


class Product(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors: tuple):
        self.factors = factors

    @property
    def args(self):
        return self.factors

    def _fields(self):
        return self.factors

    def _make_key(self):
        return (_RANK_PRODUCT, tuple(f.sort_key for f in self.factors))


class Sum(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms: tuple):
        self.terms = terms

    @property
    def args(self):
        return self.terms

    def _fields(self):
        return self.terms

    def _make_key(self):
        return (_RANK_SUM, tuple(t.sort_key for t in self.terms))


# ---------------------------------------------------------------------------
# numbers
# ---------------------------------------------------------------------------

ZERO = Integer(0)
ONE = Integer(1)
MINUS_ONE = Integer(-1)
TWO = Integer(2)
HALF = Rational(1, 2)
PI = PiConstant()


def number(value: Number) -> Expr:
    """Exact constant from an int or Fraction."""
    if isinstance(value, bool):
        value = int(value)
    if isinstance(value, int):
        if value == 0:
            return ZERO
        if value == 1:
            return ONE
        return Integer(value)
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return number(value.numerator)
        return Rational(value.numerator, value.denominator)
    raise TypeError(f"not an exact number: {value!r}")


def is_number(e: Expr) -> bool:
    return type(e) is Integer or type(e) is Rational


def sympify(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return number(x)
    if isinstance(x, str):
        return Symbol(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an expression")


def symbols(names: str) -> tuple[Symbol, ...]:
    """``symbols("r, phi, z")`` -> three Symbols."""
    return tuple(Symbol(n.strip()) for n in names.replace(",", " ").split())


# ---------------------------------------------------------------------------
# canonical constructors
# ---------------------------------------------------------------------------


def _split_coeff(t: Expr) -> tuple[Fraction, Expr]:
    if type(t) is Product and is_number(t.factors[0]):
        rest = t.factors[1:]
        return t.factors[0].fraction, rest[0] if len(rest) == 1 else Product(rest)
    return Fraction(1), t


def _with_coeff(c: Fraction, rest: Expr) -> Expr:
    if c == 1:
        return rest
    if type(rest) is Product:
        return Product((number(c),) + rest.factors)
    return Product((number(c), rest))


def _term_key(t: Expr):
    c, rest = _split_coeff(t)
    return (rest.sort_key, c)


def add(*terms: Expr) -> Expr:
    const = Fraction(0)
    coeffs: dict[Expr, Fraction] = {}
    stack = list(terms)
    stack.reverse()
    while stack:
        t = stack.pop()
        if type(t) is Sum:
            stack.extend(reversed(t.terms))
            continue
        if is_number(t):
            const += t.fraction
            continue
        c, rest = _split_coeff(t)
        coeffs[rest] = coeffs.get(rest, 0) + c
    out = [_with_coeff(c, rest) for rest, c in coeffs.items() if c != 0]
    if const != 0:
        out.append(number(const))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    out.sort(key=_term_key)
    return Sum(tuple(out))


def _split_power(f: Expr) -> tuple[Expr, Expr]:
    if type(f) is Power:
        if type(f.base) is Sqrt:
            return f.base.arg, mul(f.exp, HALF)
        return f.base, f.exp
    if type(f) is Sqrt:
        return f.arg, HALF
    return f, ONE


def _factor_key(f: Expr):
    b, e = _split_power(f)
    return (b.sort_key, e.sort_key)


def mul(*factors: Expr) -> Expr:
    coeff = Fraction(1)
    exps: dict[Expr, list] = {}
    stack = list(factors)
    stack.reverse()
    while stack:
        f = stack.pop()
        t = type(f)
        if t is Product:
            stack.extend(reversed(f.factors))
            continue
        if t is Integer or t is Rational:
            coeff *= f.fraction
            continue
        b, e = _split_power(f)
        exps.setdefault(b, []).append(e)
    if coeff == 0:
        return ZERO
    out = []
    again = []
    for b, es in exps.items():
        p = power(b, es[0] if len(es) == 1 else add(*es))
        if p is ONE:
            continue
        tp = type(p)
        if tp is Integer or tp is Rational or tp is Product:
            again.append(p)
        else:
            out.append(p)
    if again:
        # folding produced numbers or products, e.g. sqrt(2)*sqrt(2) -> 2
        return mul(number(coeff), *out, *again)
    if not out:
        return number(coeff)
    if len(out) == 1 and coeff == 1:
        return out[0]
    if len(out) == 1 and type(out[0]) is Sum:
        # numbers distribute over a lone sum
        return add(*(mul(number(coeff), t) for t in out[0].terms))
    out.sort(key=_factor_key)
    if coeff != 1:
        out.insert(0, number(coeff))
    return Product(tuple(out))


def neg(e: Expr) -> Expr:
    return mul(MINUS_ONE, e)


def sub(a: Expr, b: Expr) -> Expr:
    return add(a, neg(b))


def div(a: Expr, b: Expr) -> Expr:
    return mul(a, power(b, MINUS_ONE))


def _exact_root(n: int, k: int) -> int | None:
    if n < 0:
        return None
    r = round(n ** (1.0 / k)) if n < 2**52 else _int_root(n, k)
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**k == n:
            return cand
    return None


def _int_root(n: int, k: int) -> int:
    lo, hi = 0, 1 << (n.bit_length() // k + 1)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid**k <= n:
            lo = mid
        else:
            hi = mid - 1
    return lo


def _number_power(b: Fraction, e: Fraction, base_expr: Expr, exp_expr: Expr) -> Expr:
    if e.denominator == 1:
        n = e.numerator
        if b == 0 and n < 0:
            raise DomainError("division by zero")
        return number(b**n)
    if b == 0:
        if e < 0:
            raise DomainError("division by zero")
        return ZERO
    if e.denominator == 2:
        return power(sqrt(base_expr), number(e.numerator))
    if b > 0:
        q = e.denominator
        rn = _exact_root(b.numerator, q)
        rd = _exact_root(b.denominator, q)
        if rn is not None and rd is not None:
            return number(Fraction(rn, rd) ** e.numerator)
    return Power(base_expr, exp_expr)


def power(b: Expr, e: Expr) -> Expr:
    b = sympify(b)
    e = sympify(e)
    if e is ZERO or (type(e) is Integer and e.value == 0):
        return ONE
    if e == ONE:
        return b
    if b == ONE:
        return ONE
    eb, ee = is_number(b), is_number(e)
    if eb and ee:
        return _number_power(b.fraction, e.fraction, b, e)
    if eb and b.fraction == 0 and ee and e.fraction > 0:
        return ZERO
    if ee:
        ef = e.fraction
        if ef.denominator == 2:
            return power(sqrt(b), number(ef.numerator))
        if ef.denominator == 1:
            n = ef.numerator
            tb = type(b)
            if tb is Power:
                return power(b.base, mul(b.exp, e))
            if tb is Sqrt:
                if n % 2 == 0:
                    return power(b.arg, number(n // 2))
                return Power(b, e)
            if tb is Product:
                return mul(*(power(f, e) for f in b.factors))
    return Power(b, e)


def sqrt(x: Expr) -> Expr:
    x = sympify(x)
    if is_number(x):
        f = x.fraction
        if f < 0:
            return Sqrt(x)
        if f == 0:
            return ZERO
        pq = f.numerator * f.denominator
        outer, inner = _square_part(pq)
        c = Fraction(outer, f.denominator)
        if inner == 1:
            return number(c)
        if c == 1:
            return Sqrt(Integer(inner))
        return mul(number(c), Sqrt(Integer(inner)))
    if type(x) is Product and is_number(x.factors[0]) and x.factors[0].fraction > 0:
        c = x.factors[0]
        rest = x.factors[1:]
        return mul(sqrt(c), Sqrt(rest[0] if len(rest) == 1 else Product(rest)))
    return Sqrt(x)


def _square_part(n: int) -> tuple[int, int]:
    """Write n = outer**2 * inner with inner squarefree (trial division)."""
    outer, inner = 1, 1
    k = 2
    while k * k <= n:
        while n % (k * k) == 0:
            outer *= k
            n //= k * k
        if n % k == 0:
            inner *= k
            n //= k
        k += 1
    return outer, inner * n


def could_extract_minus(e: Expr) -> bool:
    t = type(e)
    if t is Integer or t is Rational:
        return e.fraction < 0
    if t is Product:
        return is_number(e.factors[0]) and e.factors[0].fraction < 0
    if t is Sum:
        return could_extract_minus(e.terms[0])
    return False


def _pi_multiple(e: Expr) -> Fraction | None:
    if e is PI or type(e) is PiConstant:
        return Fraction(1)
    if type(e) is Product and len(e.factors) == 2 and is_number(e.factors[0]):
        if type(e.factors[1]) is PiConstant:
            return e.factors[0].fraction
    if is_number(e) and e.fraction == 0:
        return Fraction(0)
    return None


def _sin_of_pi_multiple(k: Fraction) -> Expr | None:
    k = k % 2
    if k.denominator not in (1, 2, 3, 4, 6):
        return None
    sign = 1
    if k >= 1:
        k -= 1
        sign = -1
    if k > Fraction(1, 2):
        k = 1 - k
    table = {
        Fraction(0): ZERO,
        Fraction(1, 6): HALF,
        Fraction(1, 4): mul(HALF, Sqrt(TWO)),
        Fraction(1, 3): mul(HALF, Sqrt(Integer(3))),
        Fraction(1, 2): ONE,
    }
    v = table[k]
    return neg(v) if sign < 0 else v


def sin(x: Expr) -> Expr:
    x = sympify(x)
    k = _pi_multiple(x)
    if k is not None:
        v = _sin_of_pi_multiple(k)
        if v is not None:
            return v
    if could_extract_minus(x):
        return neg(sin(neg(x)))
    return Sin(x)


def cos(x: Expr) -> Expr:
    x = sympify(x)
    k = _pi_multiple(x)
    if k is not None:
        v = _sin_of_pi_multiple(Fraction(1, 2) - k)
        if v is not None:
            return v
    if could_extract_minus(x):
        return cos(neg(x))
    return Cos(x)


def tan(x: Expr) -> Expr:
    return div(sin(x), cos(x))


def rebuild(e: Expr, children: list) -> Expr:
    """Re-run canonical construction of ``e``'s node type over new children."""
    t = type(e)
    if t is Sum:
        return add(*children)
    if t is Product:
        return mul(*children)
    if t is Power:
        return power(children[0], children[1])
    if t is Sin:
        return sin(children[0])
    if t is Cos:
        return cos(children[0])
    if t is Sqrt:
        return sqrt(children[0])
    return e


def preorder(e: Expr):
    """Yield every node once (shared subtrees are visited once)."""
    seen = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        yield n
        stack.extend(n.args)
