# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twin of ``_kernels_py``; same contracts, typed loops."""

BITS = 16
MASK = (1 << BITS) - 1


def pmul(dict a, dict b):
    cdef dict out = {}
    cdef list bi
    cdef object ma, ca, mb, cb, m, c
    if len(a) < len(b):
        a, b = b, a
    bi = list(b.items())
    for ma, ca in a.items():
        for mb, cb in bi:
            m = ma + mb
            c = out.get(m, 0) + ca * cb
            if c:
                out[m] = c
            else:
                del out[m]
    return out


def padd(dict a, dict b, scale=1):
    cdef dict out = dict(a)
    cdef object m, c, v
    for m, c in b.items():
        v = out.get(m, 0) + scale * c
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def pscale_mono(dict p, mono, coeff):
    cdef dict out = {}
    cdef object m, c
    for m, c in p.items():
        out[m + mono] = c * coeff
    return out


cdef dict _ppow(dict p, long n, dict cache):
    cdef dict r = cache.get(n)
    cdef dict half
    if r is not None:
        return r
    half = _ppow(p, n >> 1, cache)
    r = pmul(half, half)
    if n & 1:
        r = pmul(r, p)
    cache[n] = r
    return r


def preduce(dict p, list rules):
    cdef bint changed = True
    cdef long shift, e, q
    cdef list hits
    cdef dict out, rp, powers, repl
    cdef object m, c, base, mr, cr, k, v, mask = MASK
    while changed:
        changed = False
        for shift, repl in rules:
            hits = [m for m in p if ((m >> shift) & mask) >= 2]
            if not hits:
                continue
            changed = True
            powers = {1: repl}
            out = dict(p)
            for m in hits:
                c = out.pop(m)
                e = (m >> shift) & mask
                q = e >> 1
                base = m - ((<object>(q << 1)) << shift)
                rp = _ppow(repl, q, powers)
                for mr, cr in rp.items():
                    k = base + mr
                    v = out.get(k, 0) + c * cr
                    if v:
                        out[k] = v
                    else:
                        out.pop(k, None)
            p = out
    return p


def pdiv_exact(dict a, dict b, guard):
    cdef dict r, q
    cdef list bi
    cdef object lb, cb, lr, c, rem, mq, mb, cbb, m, v
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
        for mb, cbb in bi:
            m = mq + mb
            v = r.get(m, 0) - c * cbb
            if v:
                r[m] = v
            else:
                r.pop(m, None)
    return q
