"""Polynomial kernels: compiled and pure-Python backends must agree."""
import os
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fieldcalc.symkernel import _kernels_py, backend

BITS = _kernels_py.BITS
GUARD = sum(1 << (i * BITS + BITS - 1) for i in range(4))

BACKENDS = backend.available()


def mono(*exps):
    return sum(e << (i * BITS) for i, e in enumerate(exps))


monos = st.tuples(*[st.integers(0, 4)] * 4).map(lambda t: mono(*t))
polys = st.dictionaries(monos, st.integers(-9, 9).filter(bool), max_size=6)


def test_compiled_backend_is_selected_when_built():
    if "compiled" not in BACKENDS:
        pytest.skip("compiled extension not built")
    assert backend.NAME == "compiled"


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_pmul_small(name):
    k = BACKENDS[name]
    x, y = mono(1), mono(0, 1)
    a = {x: 1, y: 1}
    b = {x: 1, y: -1}
    assert k.pmul(a, b) == {mono(2): 1, mono(0, 2): -1}


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_padd_cancels(name):
    k = BACKENDS[name]
    a = {mono(1): 2, mono(0): 3}
    assert k.padd(a, a, -1) == {}
    assert k.padd(a, {mono(0): -3}) == {mono(1): 2}


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_preduce_sin_squared(name):
    k = BACKENDS[name]
    # atom 0 = sin, atom 1 = cos; sin^2 -> 1 - cos^2
    repl = {mono(0): 1, mono(0, 2): -1}
    p = {mono(2): 1, mono(0, 2): 1}
    assert k.preduce(p, [(0, repl)]) == {mono(0): 1}


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_preduce_high_atom_index(name):
    # shifts beyond 64 bits must not overflow in the compiled kernel
    k = BACKENDS[name]
    shift = 5 * BITS
    p = {3 << shift: 1}
    out = k.preduce(p, [(shift, {0: 2})])
    assert out == {1 << shift: 2}


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_pdiv_exact(name):
    k = BACKENDS[name]
    x, y = mono(1), mono(0, 1)
    a = {x: 1, y: 1}
    b = {x: 1, y: -1}
    assert k.pdiv_exact(k.pmul(a, b), b, GUARD) == a
    assert k.pdiv_exact(a, b, GUARD) is None
    assert k.pdiv_exact({}, b, GUARD) == {}


@settings(max_examples=150, deadline=None)
@given(polys, polys)
def test_backends_agree_on_products(a, b):
    ref = _kernels_py.pmul(a, b)
    for k in BACKENDS.values():
        assert k.pmul(a, b) == ref
        assert k.padd(a, b, 3) == _kernels_py.padd(a, b, 3)


@settings(max_examples=150, deadline=None)
@given(polys, polys.filter(bool))
def test_division_inverts_multiplication(a, b):
    for k in BACKENDS.values():
        assert k.pdiv_exact(k.pmul(a, b), b, GUARD) == a


@settings(max_examples=100, deadline=None)
@given(polys)
def test_backends_agree_on_reduction(p):
    rules = [(0, {mono(0): 1, mono(0, 2): -1}), (2 * BITS, {mono(0, 0, 0, 1): 3})]
    ref = _kernels_py.preduce(p, rules)
    for k in BACKENDS.values():
        out = k.preduce(p, rules)
        assert out == ref
        assert all(((m >> 0) & 0xFFFF) < 2 and ((m >> 2 * BITS) & 0xFFFF) < 2 for m in out)


def test_pure_backend_runs_identities():
    code = (
        "from fieldcalc.symkernel import backend; assert backend.NAME == 'python';"
        "from fieldcalc.builtin_charts import builtin_chart;"
        "from fieldcalc.verify import run_checks;"
        "rs = run_checks(builtin_chart('sphere'), 0);"
        "assert all(r.passed for r in rs), [r.line() for r in rs]"
    )
    env = dict(os.environ, FIELDCALC_PURE="1")
    proc = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                          timeout=300)
    assert proc.returncode == 0, proc.stderr
