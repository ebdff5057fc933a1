# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled term kernels; same contract as ``_kernels_py``."""

from cpython.tuple cimport PyTuple_New, PyTuple_SET_ITEM, PyTuple_GET_ITEM
from cpython.ref cimport Py_INCREF


cdef inline tuple _add_keys(tuple a, tuple b):
    cdef Py_ssize_t i, n = len(a)
    cdef tuple out = PyTuple_New(n)
    cdef object v
    for i in range(n):
        v = <long>(<object>PyTuple_GET_ITEM(a, i)) + <long>(<object>PyTuple_GET_ITEM(b, i))
        Py_INCREF(v)
        PyTuple_SET_ITEM(out, i, v)
    return out


cdef inline dict _finish(dict acc, long p):
    cdef dict out = {}
    cdef long v
    for k, c in acc.items():
        v = (<long>c) % p
        if v:
            out[k] = v
    return out


def add_terms(dict a, dict b, long p, long sign=1):
    cdef dict out = dict(a)
    cdef long v
    for k, c in b.items():
        v = (<long>out.get(k, 0) + sign * <long>c) % p
        if v:
            out[k] = v
        else:
            out.pop(k, None)
    return out


def scale_terms(dict a, long c, long p):
    c %= p
    if not c:
        return {}
    return {k: (<long>v) * c % p for k, v in a.items()}


def mul_terms(dict a, dict b, long p):
    if len(a) < len(b):
        a, b = b, a
    cdef dict acc = {}
    cdef long cb
    cdef tuple k
    cdef list ia = list(a.items())
    for kb, cbo in b.items():
        cb = cbo
        for ka, ca in ia:
            k = _add_keys(<tuple>ka, <tuple>kb)
            acc[k] = <long>acc.get(k, 0) + <long>ca * cb
    return _finish(acc, p)


def accumulate(dict acc, dict terms, long c):
    for k, v in terms.items():
        acc[k] = <long>acc.get(k, 0) + c * <long>v


def finish(dict acc, long p):
    return _finish(acc, p)


def shift_terms(dict a, tuple shift):
    return {_add_keys(<tuple>k, shift): c for k, c in a.items()}


cdef dict _reduce_monomial(tuple key, tuple rules, long p, dict cache):
    cdef object hit = cache.get(key)
    if hit is not None:
        return <dict>hit
    cdef long e, cr
    cdef Py_ssize_t slot
    cdef list base
    cdef dict acc, sub, out = None
    for rule in rules:
        slot = (<tuple>rule)[0]
        e = <long>key[slot]
        if e >= p:
            base = list(key)
            base[slot] = e - p
            bt = tuple(base)
            acc = {}
            for kr, cro in (<dict>(<tuple>rule)[1]).items():
                cr = cro
                sub = _reduce_monomial(_add_keys(bt, <tuple>kr), rules, p, cache)
                for k, v in sub.items():
                    acc[k] = <long>acc.get(k, 0) + cr * <long>v
            out = _finish(acc, p)
            break
    if out is None:
        out = {key: 1}
    cache[key] = out
    return out


def reduce_terms(dict terms, tuple rules, long p, dict cache):
    cdef dict acc = {}
    cdef long c
    for key, co in terms.items():
        c = co
        for k, v in _reduce_monomial(<tuple>key, rules, p, cache).items():
            acc[k] = <long>acc.get(k, 0) + c * <long>v
    return _finish(acc, p)
