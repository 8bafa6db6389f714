"""Rational-function normal form and ``simplify``.

An expression is mapped to ``num / (c * prod(factor**e))`` where ``num`` is a
polynomial with integer coefficients over *atoms* (symbols, field-function
nodes, ``sin``/``cos`` of a canonical argument, square roots, opaque powers).
Two relations are built into the polynomial arithmetic:

* ``sin(u)**2 -> 1 - cos(u)**2``, so numerators are at most linear in sines;
* ``sqrt(R)**2 -> R`` for every square-root atom.

With those reductions a numerator is zero exactly when the expression is,
which is what zero-testing relies on.  Denominators are kept factored over a
growing factor base so sums never multiply out unrelated denominators.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import gcd, isqrt

from .assumptions import NONE, Assumptions
from .backend import BITS, MASK, padd, pdiv_exact, pmul, preduce, pscale_mono
from .evaluate import DomainError
from .expr import (
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
    _square_part,
    add,
    cos,
    mul,
    number,
    power,
    sin,
    sqrt,
)

_ONE_POLY = {0: 1}


class RF:
    """``num / (c * prod(factors[fid]**e for fid, e in den))``."""

    __slots__ = ("num", "c", "den")

    def __init__(self, num: dict, c: int = 1, den: tuple = ()):
        self.num = num
        self.c = c
        self.den = den

    def __repr__(self):
        return f"RF({self.num!r}, {self.c}, {self.den!r})"


_ZERO_RF = RF({}, 1, ())


def _merge_den(a: tuple, b: tuple, sign: int = 1) -> tuple:
    if not b:
        return a
    if not a and sign == 1:
        return b
    d = dict(a)
    for fid, e in b:
        d[fid] = d.get(fid, 0) + sign * e
    return tuple(sorted((k, v) for k, v in d.items() if v))


def _content(p: dict) -> int:
    g = 0
    for c in p.values():
        g = gcd(g, c)
        if g == 1:
            break
    return g


class Normalizer:
    """One normalization context: atom table, reduction rules, factor base.

    Contexts are cheap and not shared between threads; ``simplify`` creates a
    fresh one per call.
    """

    def __init__(self, assumptions: Assumptions | None = None):
        self.assume = assumptions or NONE
        self.atoms: list[Expr] = []
        self.index: dict[Expr, int] = {}
        self.rules: list[tuple[int, dict]] = []
        self.rule_for: dict[int, dict] = {}
        self.trig_pair: dict[int, int] = {}
        self.factors: list[dict] = []
        self.factor_atom: list[int | None] = []
        self.factor_ids: dict[frozenset, int] = {}
        self.guard = 0
        self.memo: dict[Expr, RF] = {}
        self._fpow: dict[tuple[int, int], dict] = {}
        self._positive_polys: list[dict] | None = None
        self._atom_positive: dict[int, bool] = {}

    # atoms ---------------------------------------------------------------
    def _register(self, e: Expr) -> int:
        i = self.index.get(e)
        if i is not None:
            return i
        i = len(self.atoms)
        if i * BITS > 1 << 20:  # pragma: no cover
            raise OverflowError("too many atoms")
        self.atoms.append(e)
        self.index[e] = i
        self.guard |= 1 << (i * BITS + BITS - 1)
        return i

    def _add_rule(self, i: int, repl: dict) -> None:
        self.rule_for[i] = repl
        self.rules.append((i * BITS, repl))

    @staticmethod
    def unit(i: int, e: int = 1) -> int:
        return e << (i * BITS)

    def atom_poly(self, i: int) -> dict:
        return {1 << (i * BITS): 1}

    def trig_atom(self, node: Expr) -> int:
        u = node.arg
        c = Cos(u)
        ci = self.index.get(c)
        if ci is None:
            ci = self._register(c)
        s = Sin(u)
        si = self.index.get(s)
        if si is None:
            si = self._register(s)
            self._add_rule(si, {0: 1, self.unit(ci, 2): -1})
            self.trig_pair[ci] = si
        return si if type(node) is Sin else ci

    def sqrt_atom(self, node: Sqrt, radicand: dict) -> int:
        i = self.index.get(node)
        if i is None:
            i = self._register(node)
            self._add_rule(i, radicand)
        return i

    def reduce(self, p: dict) -> dict:
        if self.rules and p:
            return preduce(p, self.rules)
        return p

    @staticmethod
    def exponents(m: int):
        i = 0
        while m:
            e = m & MASK
            if e:
                yield i, e
            m >>= BITS
            i += 1

    # conversion in --------------------------------------------------------
    def to_rf(self, e: Expr) -> RF:
        hit = self.memo.get(e)
        if hit is None:
            hit = self._to_rf(e)
            self.memo[e] = hit
        return hit

    def _to_rf(self, e: Expr) -> RF:
        t = type(e)
        if t is Integer:
            return RF({0: e.value}) if e.value else _ZERO_RF
        if t is Rational:
            return RF({0: e.num}, e.den)
        if t is Symbol or t is PiConstant or t is FieldFunction or t is PartialDerivative:
            return RF(self.atom_poly(self._register(e)))
        if t is Sum:
            return self.add_many([self.to_rf(a) for a in e.terms])
        if t is Product:
            acc = self.to_rf(e.factors[0])
            for f in e.factors[1:]:
                acc = self.mul(acc, self.to_rf(f))
            return acc
        if t is Power:
            if type(e.exp) is Integer:
                return self.pow(self.to_rf(e.base), e.exp.value)
            node = power(self.to_expr(self.to_rf(e.base)), self.to_expr(self.to_rf(e.exp)))
            if type(node) is Power and type(node.exp) is not Integer:
                return RF(self.atom_poly(self._register(node)))
            return self.to_rf(node)
        if t is Sin or t is Cos:
            arg = self.to_expr(self.to_rf(e.arg))
            node = sin(arg) if t is Sin else cos(arg)
            if type(node) is Sin or type(node) is Cos:
                return RF(self.atom_poly(self.trig_atom(node)))
            return self.to_rf(node)
        if t is Sqrt:
            return self.sqrt(self.to_rf(e.arg))
        raise TypeError(f"cannot normalize {t.__name__}")  # pragma: no cover

    # rational-function arithmetic ------------------------------------------
    def fpow(self, fid: int, e: int) -> dict:
        key = (fid, e)
        p = self._fpow.get(key)
        if p is None:
            if e == 1:
                p = self.factors[fid]
            else:
                p = self.reduce(pmul(self.fpow(fid, e - 1), self.factors[fid]))
            self._fpow[key] = p
        return p

    def expand_den(self, r: RF) -> dict:
        p = {0: r.c}
        for fid, e in r.den:
            p = pmul(p, self.fpow(fid, e))
        return self.reduce(p)

    def mul(self, a: RF, b: RF) -> RF:
        if not a.num or not b.num:
            return _ZERO_RF
        num = self.reduce(pmul(a.num, b.num))
        return self.cancel(num, a.c * b.c, _merge_den(a.den, b.den))

    def add_many(self, rfs: list[RF]) -> RF:
        groups: dict[tuple, dict] = {}
        for r in rfs:
            if not r.num:
                continue
            key = (r.c, r.den)
            cur = groups.get(key)
            groups[key] = r.num if cur is None else padd(cur, r.num)
        groups = {k: v for k, v in groups.items() if v}
        if not groups:
            return _ZERO_RF
        if len(groups) == 1:
            (c, den), num = next(iter(groups.items()))
            return self.cancel(num, c, den) if (c != 1 or den) else RF(num)
        lcm = 1
        dmax: dict[int, int] = {}
        for c, den in groups:
            lcm = lcm * c // gcd(lcm, c)
            for fid, e in den:
                if e > dmax.get(fid, 0):
                    dmax[fid] = e
        total: dict = {}
        for (c, den), num in groups.items():
            have = dict(den)
            mult = {0: lcm // c}
            for fid, e in dmax.items():
                miss = e - have.get(fid, 0)
                if miss:
                    mult = pmul(mult, self.fpow(fid, miss))
            total = padd(total, pmul(num, mult))
        total = self.reduce(total)
        return self.cancel(total, lcm, tuple(sorted(dmax.items())))

    def neg(self, a: RF) -> RF:
        return RF({m: -c for m, c in a.num.items()}, a.c, a.den)

    def sub(self, a: RF, b: RF) -> RF:
        return self.add_many([a, self.neg(b)])

    def pow(self, a: RF, n: int) -> RF:
        if n == 0:
            return RF(dict(_ONE_POLY))
        if n < 0:
            return self.pow(self.inv(a), -n)
        result = None
        base = a
        while n:
            if n & 1:
                result = base if result is None else self.mul(result, base)
            n >>= 1
            if n:
                base = self.mul(base, base)
        return result

    def cancel(self, num: dict, c: int, den: tuple) -> RF:
        if not num:
            return _ZERO_RF
        kept = []
        for fid, e in den:
            while e > 0:
                q = self.divide_by_factor(num, fid)
                if q is None:
                    break
                num = q
                e -= 1
            if e:
                kept.append((fid, e))
        if c != 1:
            g = gcd(_content(num), c)
            if g > 1:
                num = {m: v // g for m, v in num.items()}
                c //= g
        return RF(num, c, tuple(kept))

    def divide_by_factor(self, num: dict, fid: int) -> dict | None:
        ai = self.factor_atom[fid]
        if ai is None:
            return pdiv_exact(num, self.factors[fid], self.guard)
        shift = ai * BITS
        unit = 1 << shift
        rule = self.rule_for.get(ai)
        if rule is None:
            for m in num:
                if not (m >> shift) & MASK:
                    return None
            return {m - unit: c for m, c in num.items()}
        # num = A + atom*B with atom**2 == rule:  num/atom = B + atom*(A/rule)
        a_part, b_part = {}, {}
        for m, c in num.items():
            if (m >> shift) & MASK:
                b_part[m - unit] = c
            else:
                a_part[m] = c
        if not a_part:
            return b_part
        qa = pdiv_exact(a_part, rule, self.guard)
        if qa is None:
            return None
        return self.reduce(padd(b_part, pscale_mono(qa, unit, 1)))

    def inv(self, a: RF) -> RF:
        if not a.num:
            raise DomainError("division by zero")
        newnum = self.expand_den(a)
        k, sign, mono, q = self.split_content(a.num)
        den = [(self.atom_factor(i), e) for i, e in self.exponents(mono)]
        den.extend((fid, 1) for fid in self.decompose(q))
        merged: dict[int, int] = {}
        for fid, e in den:
            merged[fid] = merged.get(fid, 0) + e
        if sign < 0:
            newnum = {m: -v for m, v in newnum.items()}
        return self.cancel(newnum, k, tuple(sorted(merged.items())))

    def split_content(self, p: dict) -> tuple[int, int, int, dict]:
        """``p = sign * k * x**mono * q`` with ``q`` primitive, canonical sign."""
        k = _content(p)
        mono = 0
        shift = 0
        for _ in range(len(self.atoms)):
            lo = min((m >> shift) & MASK for m in p)
            if lo:
                mono += lo << shift
            shift += BITS
        q = {m - mono: c // k for m, c in p.items()}
        sign = 1
        if self.canonical_lead(q) < 0:
            sign = -1
            q = {m: -c for m, c in q.items()}
        return k, sign, mono, q

    def canonical_lead(self, p: dict) -> int:
        """Leading coefficient under lex order of atoms by canonical sort key.

        Unlike the packed-int order this does not depend on atom
        registration order, so factor signs are reproducible.
        """
        if len(p) == 1:
            return next(iter(p.values()))
        present = set()
        for m in p:
            for i, _ in self.exponents(m):
                present.add(i)
        order = sorted(present, key=lambda i: self.atoms[i].sort_key, reverse=True)
        shifts = [i * BITS for i in order]
        best = max(p, key=lambda m: tuple((m >> s) & MASK for s in shifts))
        return p[best]

    def atom_factor(self, i: int) -> int:
        key = frozenset(((1 << (i * BITS), 1),))
        fid = self.factor_ids.get(key)
        if fid is None:
            fid = len(self.factors)
            self.factors.append(self.atom_poly(i))
            self.factor_atom.append(i)
            self.factor_ids[key] = fid
        return fid

    def decompose(self, q: dict) -> list[int]:
        """Split a primitive, monomial-free polynomial over the factor base."""
        if q == _ONE_POLY:
            return []
        out = []
        for fid, f in enumerate(self.factors):
            if self.factor_atom[fid] is not None:
                continue
            while len(q) > 1:
                d = pdiv_exact(q, f, self.guard)
                if d is None:
                    break
                out.append(fid)
                q = d
        if len(q) > 2:
            s = self.poly_sqrt(q)
            if s is not None:
                if self.canonical_lead(s) < 0:
                    s = {m: -c for m, c in s.items()}
                return out + 2 * self.decompose(s)
        if len(q) > 1:
            key = frozenset(q.items())
            fid = self.factor_ids.get(key)
            if fid is None:
                fid = len(self.factors)
                self.factors.append(q)
                self.factor_atom.append(None)
                self.factor_ids[key] = fid
            out.append(fid)
        return out

    # square roots ---------------------------------------------------------
    def atom_positive(self, i: int) -> bool:
        hit = self._atom_positive.get(i)
        if hit is not None:
            return hit
        a = self.atoms[i]
        t = type(a)
        if t is Symbol:
            ok = self.assume.is_positive_symbol(a.name)
        elif t is PiConstant or t is Sqrt:
            ok = True
        elif t is Sin:
            ok = self.assume.sin_positive(a.arg)
        elif t is Cos:
            ok = self.assume.cos_positive(a.arg)
        else:
            ok = a in self.assume.positive_exprs
        self._atom_positive[i] = ok
        return ok

    def positive_polys(self) -> list[dict]:
        if self._positive_polys is None:
            self._positive_polys = []
            for e in self.assume.positive_exprs:
                r = self.to_rf(e)
                if r.num and not r.den and r.c == 1:
                    self._positive_polys.append(r.num)
        return self._positive_polys

    def poly_sign(self, p: dict) -> int:
        """+1 / -1 when the sign of ``p`` follows from assumptions, else 0."""
        if not p:
            return 0
        atoms_ok = all(self.atom_positive(i) for m in p for i, _ in self.exponents(m))
        if atoms_ok:
            if all(c > 0 for c in p.values()):
                return 1
            if all(c < 0 for c in p.values()):
                return -1
        for q in self.positive_polys():
            if len(q) != len(p) or q.keys() != p.keys():
                continue
            m0 = next(iter(q))
            ratio = Fraction(p[m0], q[m0])
            if all(Fraction(p[m], q[m]) == ratio for m in q):
                return 1 if ratio > 0 else -1
        return 0

    def poly_sqrt(self, q: dict) -> dict | None:
        """Exact polynomial square root (no reduction rules applied)."""
        lm = max(q)
        lc = q[lm]
        if lc <= 0:
            return None
        r = isqrt(lc)
        if r * r != lc:
            return None
        odd = 0
        for i in range(len(self.atoms)):
            odd |= 1 << (i * BITS)
        if lm & odd:
            return None
        s0 = lm >> 1
        s = {s0: r}
        for _ in range(len(q) + 2):
            rem = padd(q, pmul(s, s), -1)
            if not rem:
                return s
            lr = max(rem)
            if ((lr | self.guard) - s0) & self.guard != self.guard:
                return None
            c, bad = divmod(rem[lr], 2 * r)
            if bad:
                return None
            mt = lr - s0
            if mt >= s0:
                return None
            s[mt] = s.get(mt, 0) + c
            if not s[mt]:
                return None
        return None

    def trig_alternates(self, p: dict) -> list[dict]:
        """Rewrite ``cos(u)**2 -> 1 - sin(u)**2`` for subsets of arguments."""
        pairs = []
        for ci, si in self.trig_pair.items():
            shift = ci * BITS
            if any((m >> shift) & MASK >= 2 for m in p):
                pairs.append((ci, si))
        out = []
        pairs.sort(key=lambda pair: self.atoms[pair[0]].sort_key)
        pairs = pairs[:3]
        for k in range(1, len(pairs) + 1):
            for chosen in combinations(pairs, k):
                q = p
                for ci, si in chosen:
                    q = self._cos_to_sin(q, ci, si)
                out.append(q)
        return out

    def _cos_to_sin(self, p: dict, ci: int, si: int) -> dict:
        shift = ci * BITS
        one_minus_s2 = {0: 1, self.unit(si, 2): -1}
        out: dict = {}
        for m, c in p.items():
            e = (m >> shift) & MASK
            if e < 2:
                out = padd(out, {m: c})
                continue
            h = e >> 1
            base = m - ((2 * h) << shift)
            f = {base: c}
            for _ in range(h):
                f = pmul(f, one_minus_s2)
            out = padd(out, f)
        return out

    def _extract(self, p: dict) -> tuple[dict, dict]:
        k, sign, mono, q = self.split_content(p)
        a, b = _square_part(k)
        out_mono = 0
        in_mono = 0
        for i, e in self.exponents(mono):
            if self.atom_positive(i):
                out_mono += (e >> 1) << (i * BITS)
                in_mono += (e & 1) << (i * BITS)
            else:
                in_mono += e << (i * BITS)
        outside = {out_mono: a}
        if q != _ONE_POLY:
            s = self.poly_sqrt(q)
            if s is not None:
                sg = self.poly_sign(s)
                if sg:
                    outside = pmul(outside, s if sg > 0 else {m: -c for m, c in s.items()})
                    q = dict(_ONE_POLY)
        inside = pscale_mono(q, in_mono, sign * b)
        return outside, inside

    def _extract_best(self, p: dict) -> tuple[dict, dict]:
        best = None
        for cand in [p] + self.trig_alternates(p):
            outside, inside = self._extract(cand)
            inside = self.reduce(inside)
            score = (len(inside), sum(sum(e for _, e in self.exponents(m)) for m in inside))
            if best is None or score < best[0]:
                best = (score, outside, inside)
        return best[1], best[2]

    def sqrt_poly(self, p: dict) -> RF:
        outside = dict(_ONE_POLY)
        inside = p
        for _ in range(4):
            o, inside = self._extract_best(inside)
            if o == _ONE_POLY:
                break
            outside = pmul(outside, o)
        outside = self.reduce(outside)
        if inside == _ONE_POLY:
            return RF(outside)
        k = _content(inside)
        q = {m: c // k for m, c in inside.items()}
        if k != 1:
            ki = self.sqrt_atom(Sqrt(Integer(k)), {0: k})
            outside = self.reduce(pscale_mono(outside, self.unit(ki), 1))
        if q != _ONE_POLY:
            node = sqrt(self.poly_expr(q))
            if type(node) is not Sqrt:  # pragma: no cover
                return self.mul(RF(outside), self.to_rf(node))
            qi = self.sqrt_atom(node, q)
            outside = self.reduce(pscale_mono(outside, self.unit(qi), 1))
        return RF(outside)

    def sqrt(self, r: RF) -> RF:
        if not r.num:
            return _ZERO_RF
        if not r.den and r.c == 1:
            return self.sqrt_poly(r.num)
        den_poly = self.expand_den(r)
        top = self.sqrt_poly(self.reduce(pmul(r.num, den_poly)))
        if all(self.poly_sign(self.factors[fid]) > 0 for fid, _ in r.den):
            return self.cancel(top.num, r.c, r.den)
        bottom = self.sqrt_poly(self.reduce(pmul(den_poly, den_poly)))
        return self.mul(top, self.inv(bottom))

    # conversion out --------------------------------------------------------
    def poly_expr(self, p: dict) -> Expr:
        terms = []
        for m, c in p.items():
            fs = [number(c)]
            for i, e in self.exponents(m):
                fs.append(power(self.atoms[i], number(e)))
            terms.append(mul(*fs))
        return add(*terms)

    def _degree(self, p: dict) -> int:
        return sum(e for m in p for _, e in self.exponents(m))

    def factored_expr(self, p: dict) -> Expr:
        """``k * monomial * q`` with ``q`` shown as a square when it is one.

        Polynomials in opaque fields are left expanded, which reads better
        for operator output.
        """
        for m in p:
            for i, _ in self.exponents(m):
                if type(self.atoms[i]) in (FieldFunction, PartialDerivative):
                    return self.poly_expr(p)
        k, sign, mono, q = self.split_content(p)
        fs = [number(sign * k)]
        for i, e in self.exponents(mono):
            fs.append(power(self.atoms[i], number(e)))
        if q != _ONE_POLY:
            s = self.poly_sqrt(q) if len(q) > 2 else None
            if s is not None:
                if self.canonical_lead(s) < 0:
                    s = {m: -c for m, c in s.items()}
                fs.append(power(self.poly_expr(s), TWO))
            else:
                fs.append(self.poly_expr(q))
        return mul(*fs)

    def pretty_poly(self, p: dict) -> Expr:
        """Display form of a polynomial; picks the shortest sin/cos variant.

        The choice depends only on the polynomial, never on atom numbering,
        so printing the same normal form twice gives the same expression.
        """
        if len(p) == 1:
            return self.poly_expr(p)
        best = None
        for cand in [p] + self.trig_alternates(p):
            e = self.factored_expr(cand)
            score = (len(cand), self._degree(cand), e.sort_key)
            if best is None or score < best[0]:
                best = (score, e)
        return best[1]

    def _split_by_den(self, p: dict, left: int) -> dict[int, dict]:
        """Cancel each term of ``p / atoms**left`` against the denominator."""
        out: dict[int, dict] = {}
        for m, c in p.items():
            rest = left
            for i, d in self.exponents(left):
                take = min((m >> (i * BITS)) & MASK, d)
                m -= take << (i * BITS)
                rest -= take << (i * BITS)
            g = out.setdefault(rest, {})
            g[m] = g.get(m, 0) + c
        return {k: v for k, v in out.items() if v}

    def _best_split(self, p: dict, left: int) -> dict[int, dict]:
        """Among the sin/cos variants of ``p`` keep the one that cancels most."""
        if not left:
            return {0: p}
        best = None
        for cand in [p] + self.trig_alternates(p):
            split = self._split_by_den(cand, left)
            expr = add(*(mul(self.poly_expr(q), *(power(self.atoms[i], number(-e))
                                                   for i, e in self.exponents(k)))
                         for k, q in split.items()))
            score = (sum(len(q) for q in split.values()),
                     sum(self._degree(q) for q in split.values()), expr.sort_key)
            if best is None or score < best[0]:
                best = (score, split)
        return best[1]

    def to_expr(self, r: RF) -> Expr:
        if not r.num:
            return ZERO
        atom_den: dict[int, int] = {}
        poly_den = []
        for fid, e in r.den:
            ai = self.factor_atom[fid]
            if ai is None:
                poly_den.append((fid, e))
            else:
                atom_den[ai] = e
        # group terms by the atom denominator each one still needs
        groups: dict[int, dict] = {}
        for m, coeff in r.num.items():
            left = 0
            for i, d in atom_den.items():
                have = (m >> (i * BITS)) & MASK
                take = min(have, d)
                m -= take << (i * BITS)
                left += (d - take) << (i * BITS)
            g = groups.setdefault(left, {})
            g[m] = g.get(m, 0) + coeff
        final: dict[int, dict] = {}
        for left, p in groups.items():
            for left2, q in self._best_split(p, left).items():
                final[left2] = padd(final.get(left2, {}), q)
        terms = []
        for left, p in final.items():
            if not p:
                continue
            fs = [number(Fraction(1, r.c)), self.pretty_poly(p)]
            for i, e in self.exponents(left):
                fs.append(power(self.atoms[i], number(-e)))
            terms.append(mul(*fs))
        if not terms:  # pragma: no cover
            return ZERO
        out = add(*terms)
        if poly_den:
            out = mul(
                out,
                *(power(self.pretty_poly(self.factors[fid]), number(-e)) for fid, e in poly_den),
            )
        return out


def normal_form(e: Expr, assumptions: Assumptions | None = None) -> tuple[Normalizer, RF]:
    n = Normalizer(assumptions)
    return n, n.to_rf(e)


def simplify(e: Expr, assumptions: Assumptions | None = None) -> Expr:
    """Put ``e`` over a common denominator, collect terms, cancel factors.

    The result is mathematically equal to ``e`` and ``simplify`` is
    idempotent.  ``assumptions`` enables exact square roots of perfect
    squares with known sign (``sqrt(r**2) -> r`` when ``r > 0``).
    """
    n = Normalizer(assumptions)
    return n.to_expr(n.to_rf(e))


def is_structurally_zero(e: Expr, assumptions: Assumptions | None = None) -> bool:
    _, r = normal_form(e, assumptions)
    return not r.num
