"""Pure-Python term kernels.

A polynomial is a dict mapping an exponent tuple to a coefficient in
1..p-1.  Slot 0 of every exponent tuple is the power of the uniformizer
and may be negative; the remaining slots are variable exponents.
"""

from __future__ import annotations

Terms = dict


def add_terms(a: Terms, b: Terms, p: int, sign: int = 1) -> Terms:
    out = dict(a)
    for k, c in b.items():
        v = (out.get(k, 0) + sign * c) % p
        if v:
            out[k] = v
        else:
            out.pop(k, None)
    return out


def scale_terms(a: Terms, c: int, p: int) -> Terms:
    c %= p
    if not c:
        return {}
    return {k: v * c % p for k, v in a.items()}


def mul_terms(a: Terms, b: Terms, p: int) -> Terms:
    if len(a) < len(b):
        a, b = b, a
    acc: dict = {}
    get = acc.get
    for kb, cb in b.items():
        for ka, ca in a.items():
            k = tuple([x + y for x, y in zip(ka, kb)])
            acc[k] = get(k, 0) + ca * cb
    return {k: v % p for k, v in acc.items() if v % p}


def accumulate(acc: dict, terms: Terms, c: int) -> None:
    """acc += c * terms, without reducing mod p (caller finishes)."""
    get = acc.get
    for k, v in terms.items():
        acc[k] = get(k, 0) + c * v


def finish(acc: dict, p: int) -> Terms:
    return {k: v % p for k, v in acc.items() if v % p}


def shift_terms(a: Terms, shift: tuple) -> Terms:
    """Multiply every monomial by the monomial with exponent tuple ``shift``."""
    return {tuple([x + y for x, y in zip(k, shift)]): c for k, c in a.items()}


def _reduce_monomial(key: tuple, rules: tuple, p: int, cache: dict) -> Terms:
    hit = cache.get(key)
    if hit is not None:
        return hit
    for slot, rhs in rules:
        e = key[slot]
        if e >= p:
            base = list(key)
            base[slot] = e - p
            acc: dict = {}
            get = acc.get
            for kr, cr in rhs.items():
                sub = _reduce_monomial(tuple([x + y for x, y in zip(base, kr)]), rules, p, cache)
                for k, v in sub.items():
                    acc[k] = get(k, 0) + cr * v
            out = {k: v % p for k, v in acc.items() if v % p}
            break
    else:
        out = {key: 1}
    cache[key] = out
    return out


def reduce_terms(terms: Terms, rules: tuple, p: int, cache: dict) -> Terms:
    """Normal form of ``terms`` under rules ``x^p -> rhs``.

    ``rules`` is a tuple of ``(slot, rhs_terms)``; the first rule whose
    variable has exponent >= p is applied, so callers list the rules from
    the top of the triangular order down.  ``cache`` memoizes monomials and
    must belong to exactly one rule set.
    """
    acc: dict = {}
    get = acc.get
    for key, c in terms.items():
        for k, v in _reduce_monomial(key, rules, p, cache).items():
            acc[k] = get(k, 0) + c * v
    return {k: v % p for k, v in acc.items() if v % p}
