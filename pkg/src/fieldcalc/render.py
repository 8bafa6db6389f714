"""Text and LaTeX rendering.

Text output is valid input for :func:`fieldcalc.parser.parse_expression`,
derivative nodes included (``diff(U(r, phi, z), r, phi)``).
"""
from __future__ import annotations

from typing import Sequence

from .symkernel.expr import (
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
    could_extract_minus,
    is_number,
    neg,
    power,
)

_GREEK = {
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "iota",
    "kappa", "lambda", "mu", "nu", "xi", "pi", "rho", "sigma", "tau", "upsilon",
    "phi", "chi", "psi", "omega", "Gamma", "Delta", "Theta", "Lambda", "Xi", "Pi",
    "Sigma", "Upsilon", "Phi", "Psi", "Omega",
}


def _split_negative_power(f: Expr):
    """For ``b**(-n)`` with numeric n return ``b**n``; else None."""
    if type(f) is Power and is_number(f.exp) and f.exp.fraction < 0:
        return power(f.base, neg(f.exp))
    return None


def _parts(p: Product):
    """(negative?, numerator factors, denominator factors, |p|, q)."""
    fs = list(p.factors)
    num = 1
    den = 1
    negative = False
    if is_number(fs[0]):
        c = fs.pop(0).fraction
        negative = c < 0
        num, den = abs(c.numerator), c.denominator
    top, bottom = [], []
    for f in fs:
        inv = _split_negative_power(f)
        if inv is None:
            top.append(f)
        else:
            bottom.append(inv)
    return negative, top, bottom, num, den


# ---------------------------------------------------------------------------
# text
# ---------------------------------------------------------------------------

_P_SUM, _P_MUL, _P_POW, _P_ATOM = 1, 2, 4, 5


def _prec(e: Expr) -> int:
    t = type(e)
    if t is Sum:
        return _P_SUM
    if t is Product:
        return _P_MUL
    if t is Rational:
        return _P_MUL
    if t is Integer:
        return _P_MUL if e.value < 0 else _P_ATOM
    if t is Power:
        if is_number(e.exp) and e.exp.fraction < 0:
            return _P_MUL
        return _P_POW
    return _P_ATOM


def _wrap(e: Expr, need: int) -> str:
    s = _text(e)
    return f"({s})" if _prec(e) < need else s


def _text(e: Expr) -> str:
    t = type(e)
    if t is Integer:
        return str(e.value)
    if t is Rational:
        return f"{e.num}/{e.den}"
    if t is PiConstant:
        return "pi"
    if t is Symbol:
        return e.name
    if t is FieldFunction:
        return f"{e.name}({', '.join(p.name for p in e.params)})"
    if t is PartialDerivative:
        wrt = []
        for p, k in zip(e.target.params, e.orders):
            wrt.extend([p.name] * k)
        return f"diff({_text(e.target)}, {', '.join(wrt)})"
    if t is Sin:
        return f"sin({_text(e.arg)})"
    if t is Cos:
        return f"cos({_text(e.arg)})"
    if t is Sqrt:
        return f"sqrt({_text(e.arg)})"
    if t is Power:
        inv = _split_negative_power(e)
        if inv is not None:
            return f"1/{_wrap(inv, _P_POW)}"
        base = _wrap(e.base, _P_ATOM)
        exp = _text(e.exp)
        if _prec(e.exp) < _P_ATOM or type(e.exp) is Power:
            exp = f"({exp})"
        return f"{base}^{exp}"
    if t is Product:
        return _text_product(e)
    if t is Sum:
        terms = _display_terms(e)
        out = _text(terms[0])
        for term in terms[1:]:
            if could_extract_minus(term):
                out += " - " + _wrap(neg(term), _P_MUL)
            else:
                out += " + " + _text(term)
        return out
    raise TypeError(t.__name__)  # pragma: no cover


def _text_product(e: Product) -> str:
    # A number times a parenthesised sum would distribute on reparse, so
    # the coefficient is never placed directly before a lone sum.
    negative, top, bottom, p, q = _parts(e)
    sign = "-" if negative else ""
    plain = [_wrap(f, _P_MUL + 1) for f in top if type(f) is not Sum]
    sums = [_wrap(f, _P_MUL + 1) for f in top if type(f) is Sum]
    dplain = [_wrap(f, _P_MUL + 1) for f in bottom if type(f) is not Sum]
    dsums = [_wrap(f, _P_MUL + 1) for f in bottom if type(f) is Sum]
    if dsums and not dplain and q != 1:
        den = f"/{q}/" + ("*".join(dsums) if len(dsums) == 1 else "(" + "*".join(dsums) + ")")
    else:
        d = ([str(q)] if q != 1 else []) + dplain + dsums
        den = "" if not d else "/" + (d[0] if len(d) == 1 else "(" + "*".join(d) + ")")
    if sums and not plain and (p != 1 or negative):
        if den:
            return f"{sign}{p}{den}*" + "*".join(sums)
        return "*".join(sums) + f"*({sign}{p})"
    num = ([str(p)] if p != 1 else []) + plain + sums
    return sign + ("*".join(num) if num else "1") + den


def _display_terms(s: Sum) -> list:
    terms = list(s.terms)
    consts = [t for t in terms if is_number(t)]
    out = [t for t in terms if not is_number(t)] + consts
    # lead with a positive term when there is one
    for k, t in enumerate(out):
        if not could_extract_minus(t):
            return [t] + out[:k] + out[k + 1:]
    return out


# ---------------------------------------------------------------------------
# LaTeX
# ---------------------------------------------------------------------------


def latex_name(name: str) -> str:
    def one(part: str) -> str:
        if part in _GREEK:
            return "\\" + part
        return part

    if "_" in name:
        head, tail = name.split("_", 1)
        return f"{one(head)}_{{{latex_name(tail) if '_' in tail else one(tail)}}}"
    stripped = name.rstrip("0123456789")
    if stripped and stripped != name:
        return f"{one(stripped)}_{{{name[len(stripped):]}}}"
    return one(name)


def _lwrap(e: Expr, need: int) -> str:
    s = _latex(e)
    return f"\\left({s}\\right)" if _prec(e) < need else s


def _latex(e: Expr) -> str:
    t = type(e)
    if t is Integer:
        return str(e.value)
    if t is Rational:
        sign = "-" if e.num < 0 else ""
        return f"{sign}\\frac{{{abs(e.num)}}}{{{e.den}}}"
    if t is PiConstant:
        return "\\pi"
    if t is Symbol:
        return latex_name(e.name)
    if t is FieldFunction:
        return latex_name(e.name)
    if t is PartialDerivative:
        n = e.total_order
        top = "\\partial" if n == 1 else f"\\partial^{{{n}}}"
        bottom = []
        for p, k in zip(e.target.params, e.orders):
            if k == 1:
                bottom.append(f"\\partial {latex_name(p.name)}")
            elif k > 1:
                bottom.append(f"\\partial {latex_name(p.name)}^{{{k}}}")
        return f"\\frac{{{top} {latex_name(e.target.name)}}}{{{' '.join(bottom)}}}"
    if t is Sin:
        return f"\\sin\\left({_latex(e.arg)}\\right)"
    if t is Cos:
        return f"\\cos\\left({_latex(e.arg)}\\right)"
    if t is Sqrt:
        return f"\\sqrt{{{_latex(e.arg)}}}"
    if t is Power:
        inv = _split_negative_power(e)
        if inv is not None:
            return f"\\frac{{1}}{{{_latex(inv)}}}"
        if type(e.base) in (Sin, Cos) and type(e.exp) is Integer:
            fn = "\\sin" if type(e.base) is Sin else "\\cos"
            return f"{fn}^{{{e.exp.value}}}\\left({_latex(e.base.arg)}\\right)"
        need = _P_ATOM + 1 if type(e.base) in (Sqrt, PartialDerivative) else _P_ATOM
        return f"{_lwrap(e.base, need)}^{{{_latex(e.exp)}}}"
    if t is Product:
        negative, top, bottom, p, q = _parts(e)
        derivs = []
        if bottom:
            # keep derivative fractions outside the main fraction bar
            derivs = [_latex(f) for f in top if type(f) is PartialDerivative]
            top = [f for f in top if type(f) is not PartialDerivative]
        num = ([str(p)] if p != 1 else []) + [_lwrap(f, _P_MUL + 1) for f in top]
        den = ([str(q)] if q != 1 else []) + [_lwrap(f, _P_MUL + 1) for f in bottom]
        s = _join_latex(num) if num else "1"
        if den:
            s = f"\\frac{{{s}}}{{{_join_latex(den)}}}"
        if derivs:
            s = _join_latex([s] + derivs)
        return "-" + s if negative else s
    if t is Sum:
        terms = _display_terms(e)
        out = _latex(terms[0])
        for term in terms[1:]:
            if could_extract_minus(term):
                out += " - " + _lwrap(neg(term), _P_MUL)
            else:
                out += " + " + _latex(term)
        return out
    raise TypeError(t.__name__)  # pragma: no cover


def _join_latex(parts: list[str]) -> str:
    out = parts[0]
    for p in parts[1:]:
        sep = " \\cdot " if (out[-1:].isdigit() and p[:1].isdigit()) else " "
        out += sep + p
    return out


# ---------------------------------------------------------------------------
# public
# ---------------------------------------------------------------------------


def render(e: Expr, fmt: str = "text") -> str:
    """Render one expression as ``text`` (re-parseable) or ``latex``."""
    if fmt == "text":
        return _text(e)
    if fmt == "latex":
        return _latex(e)
    raise ValueError(f"unknown format {fmt!r}")


def render_vector(components: Sequence[Expr], fmt: str = "text") -> str:
    """One component per line, labelled with the unit basis vectors."""
    if fmt == "latex":
        rows = " \\\\ ".join(_latex(c) for c in components)
        return f"\\begin{{pmatrix}} {rows} \\end{{pmatrix}}"
    return "\n".join(f"e_{i + 1}: {_text(c)}" for i, c in enumerate(components))


def render_matrix(rows: Sequence[Sequence[Expr]], fmt: str = "text") -> str:
    if fmt == "latex":
        body = " \\\\ ".join(" & ".join(_latex(x) for x in row) for row in rows)
        return f"\\begin{{pmatrix}} {body} \\end{{pmatrix}}"
    return "\n".join("[" + ", ".join(_text(x) for x in row) + "]" for row in rows)
