"""Sparse polynomial kernels, pure-Python implementation.

A polynomial is a ``dict`` mapping a packed monomial to a nonzero ``int``
coefficient.  A packed monomial stores the exponent of atom ``i`` in bits
``[i*BITS, (i+1)*BITS)``, so multiplying monomials is integer addition and
comparing packed ints is a lexicographic monomial order.  The top bit of
each field is kept clear and serves as a guard bit for divisibility tests.

``_kernels.pyx`` mirrors this module function for function.
"""

BITS = 16
MASK = (1 << BITS) - 1


def pmul(a, b):
    """Product of two polynomials."""
    if len(a) < len(b):
        a, b = b, a
    out = {}
    get = out.get
    bi = list(b.items())
    for ma, ca in a.items():
        for mb, cb in bi:
            m = ma + mb
            c = get(m, 0) + ca * cb
            if c:
                out[m] = c
            else:
                del out[m]
    return out


def padd(a, b, scale=1):
    """``a + scale*b`` as a new polynomial."""
    out = dict(a)
    get = out.get
    for m, c in b.items():
        v = get(m, 0) + scale * c
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def pscale_mono(p, mono, coeff):
    """``coeff * x^mono * p``."""
    return {m + mono: c * coeff for m, c in p.items()}


def preduce(p, rules):
    """Rewrite ``atom**2 -> repl`` until every ruled atom has degree <= 1.

    ``rules`` is a list of ``(shift, repl)`` pairs, ``shift`` being the bit
    offset of the atom's exponent field.
    """
    changed = True
    while changed:
        changed = False
        for shift, repl in rules:
            hits = []
            for m in p:
                if (m >> shift) & MASK >= 2:
                    hits.append(m)
            if not hits:
                continue
            changed = True
            powers = {1: repl}
            out = dict(p)
            for m in hits:
                c = out.pop(m)
                e = (m >> shift) & MASK
                q = e >> 1
                base = m - ((q << 1) << shift)
                rp = powers.get(q)
                if rp is None:
                    rp = _ppow(repl, q, powers)
                get = out.get
                for mr, cr in rp.items():
                    k = base + mr
                    v = get(k, 0) + c * cr
                    if v:
                        out[k] = v
                    else:
                        out.pop(k, None)
            p = out
    return p


def _ppow(p, n, cache):
    r = cache.get(n)
    if r is not None:
        return r
    half = _ppow(p, n >> 1, cache)
    r = pmul(half, half)
    if n & 1:
        r = pmul(r, p)
    cache[n] = r
    return r


def pdiv_exact(a, b, guard):
    """Exact quotient ``a / b`` over the integers, or ``None``."""
    if not a:
        return {}
    lb = max(b)
    cb = b[lb]
    bi = list(b.items())
    r = dict(a)
    q = {}
    while r:
        lr = max(r)
        if ((lr | guard) - lb) & guard != guard:
            return None
        c, rem = divmod(r[lr], cb)
        if rem:
            return None
        mq = lr - lb
        q[mq] = c
        get = r.get
        for mb, cbb in bi:
            m = mq + mb
            v = get(m, 0) - c * cbb
            if v:
                r[m] = v
            else:
                r.pop(m, None)
    return q
