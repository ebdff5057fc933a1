"""Exact arithmetic over F_p[pi, 1/pi].

Everything in this package is a polynomial with coefficients in the prime
field F_p, in a list of named variables plus the uniformizer ``pi``.  The
valuation ring R = k[[pi]] is only ever touched through finitely many powers
of pi, so Laurent polynomials in pi are enough; elements with negative
pi-exponents stand for elements of the fraction field.

The module provides

* :class:`BaseElement` -- a Laurent polynomial in ``pi``;
* :class:`PolyRing` / :class:`MPoly` -- sparse polynomials in named variables;
* :class:`RewriteSystem` -- triangular rules ``x^p -> rhs`` realizing
  quotient rings such as ``R[u1,u2]/(u1^p - u1, u2^p - u2)``;
* :class:`Lattice` -- echelon forms of finitely generated R-submodules of a
  free module, with exact membership.

Textual syntax (used by the CLI) is ``+``-separated terms such as
``2*pi^-3*u1^2*u2``.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence, Union

from . import kernels as _k

INFINITY = math.inf


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class PrimeCtx:
    """The characteristic p of the residue field k = F_p."""

    p: int

    def __post_init__(self):
        if not isinstance(self.p, int) or not is_prime(self.p):
            raise ValueError(f"p must be prime, got {self.p!r}")


def check_prime(p: int) -> int:
    return PrimeCtx(p).p


@dataclass(frozen=True)
class Check:
    """Outcome of an identity check; falsy on failure, with the residual."""

    ok: bool
    name: str = ""
    residual: object = None
    where: str = ""

    def __bool__(self):
        return self.ok

    def describe(self) -> str:
        if self.ok:
            return f"{self.name}: ok"
        loc = f" at {self.where}" if self.where else ""
        return f"{self.name}: FAILED{loc}, residual {self.residual}"


# ---------------------------------------------------------------------------
# Laurent polynomials in pi


class BaseElement:
    """A Laurent polynomial in ``pi`` over F_p.

    ``coeffs`` maps exponents of pi (possibly negative) to nonzero residues.
    Instances are immutable and hashable.
    """

    __slots__ = ("p", "_c", "_hash")

    def __init__(self, p: int, coeffs: Mapping[int, int] | None = None):
        self.p = p
        c = {}
        for e, v in (coeffs or {}).items():
            v %= p
            if v:
                c[int(e)] = v
        self._c = c
        self._hash = None

    @classmethod
    def _raw(cls, p: int, c: dict) -> "BaseElement":
        obj = cls.__new__(cls)
        obj.p = p
        obj._c = c
        obj._hash = None
        return obj

    @classmethod
    def pi_power(cls, p: int, e: int = 1, c: int = 1) -> "BaseElement":
        return cls(p, {e: c})

    @classmethod
    def const(cls, p: int, c: int) -> "BaseElement":
        return cls(p, {0: c})

    @property
    def coeffs(self) -> dict[int, int]:
        return dict(self._c)

    def _coerce(self, other) -> "BaseElement":
        if isinstance(other, BaseElement):
            if other.p != self.p:
                raise ValueError("characteristic mismatch")
            return other
        if isinstance(other, int):
            return BaseElement(self.p, {0: other})
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        c = dict(self._c)
        for e, v in other._c.items():
            s = (c.get(e, 0) + v) % self.p
            if s:
                c[e] = s
            else:
                c.pop(e, None)
        return BaseElement._raw(self.p, c)

    __radd__ = __add__

    def __neg__(self):
        return BaseElement._raw(self.p, {e: self.p - v for e, v in self._c.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, MPoly):
            return NotImplemented
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        p = self.p
        acc: dict[int, int] = {}
        for e1, v1 in self._c.items():
            for e2, v2 in other._c.items():
                acc[e1 + e2] = acc.get(e1 + e2, 0) + v1 * v2
        return BaseElement._raw(p, {e: v % p for e, v in acc.items() if v % p})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            if not self.is_monomial():
                raise ValueError("only monomials in pi are invertible here")
            (e, v), = self._c.items()
            return BaseElement(self.p, {e * n: pow(v, -n * (self.p - 2), self.p)})
        result = BaseElement.const(self.p, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, int):
            other = BaseElement(self.p, {0: other})
        if not isinstance(other, BaseElement):
            return NotImplemented
        return self.p == other.p and self._c == other._c

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.p, frozenset(self._c.items())))
        return self._hash

    def __bool__(self):
        return bool(self._c)

    def is_zero(self) -> bool:
        return not self._c

    def valuation(self):
        """Least exponent of pi; ``INFINITY`` for zero."""
        return min(self._c) if self._c else INFINITY

    def degree(self):
        return max(self._c) if self._c else -INFINITY

    def is_integral(self) -> bool:
        return not self._c or min(self._c) >= 0

    def is_monomial(self) -> bool:
        return len(self._c) == 1

    def lowest_coefficient(self) -> int:
        return self._c[min(self._c)] if self._c else 0

    def shift(self, k: int) -> "BaseElement":
        """Multiply by pi^k."""
        return BaseElement._raw(self.p, {e + k: v for e, v in self._c.items()})

    def mod_pi(self) -> "BaseElement":
        if not self.is_integral():
            raise ValueError(f"{self} is not integral; cannot reduce mod pi")
        return BaseElement(self.p, {0: self._c.get(0, 0)})

    def inverse_residue(self) -> int:
        """Inverse of the lowest coefficient in F_p."""
        return pow(self.lowest_coefficient(), self.p - 2, self.p)

    def items(self):
        return sorted(self._c.items())

    def __str__(self):
        if not self._c:
            return "0"
        return " + ".join(_format_term(v, e, ()) for e, v in sorted(self._c.items()))

    def __repr__(self):
        return f"BaseElement(p={self.p}, {self})"


Scalar = Union[int, BaseElement]


def _format_term(c: int, pi_exp: int, factors: Sequence[tuple[str, int]]) -> str:
    parts = []
    if c != 1 or (pi_exp == 0 and not factors):
        parts.append(str(c))
    if pi_exp:
        parts.append("pi" if pi_exp == 1 else f"pi^{pi_exp}")
    for name, e in factors:
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts)


# ---------------------------------------------------------------------------
# Sparse multivariate polynomials


_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class PolyRing:
    """F_p[pi, 1/pi][x_1, ..., x_n] with declared variable order."""

    __slots__ = ("p", "names", "_index", "__weakref__")

    def __init__(self, p: int, names: Iterable[str]):
        names = tuple(names)
        for n in names:
            if not _NAME_RE.match(n) or n == "pi":
                raise ValueError(f"invalid variable name {n!r}")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        self.p = check_prime(p)
        self.names = names
        self._index = {n: i + 1 for i, n in enumerate(names)}

    @property
    def nvars(self) -> int:
        return len(self.names)

    def slot(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"variable {name!r} not in ring {self.names}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __eq__(self, other):
        return isinstance(other, PolyRing) and self.p == other.p and self.names == other.names

    def __hash__(self):
        return hash((self.p, self.names))

    def __repr__(self):
        return f"PolyRing(p={self.p}, names={self.names})"

    def _zero_key(self) -> tuple:
        return (0,) * (self.nvars + 1)

    @property
    def zero(self) -> "MPoly":
        return MPoly(self, {}, trusted=True)

    @property
    def one(self) -> "MPoly":
        return MPoly(self, {self._zero_key(): 1}, trusted=True)

    @property
    def pi(self) -> "MPoly":
        return self.monomial(pi=1)

    def gen(self, name: str) -> "MPoly":
        return self.monomial({name: 1})

    def gens(self) -> tuple["MPoly", ...]:
        return tuple(self.gen(n) for n in self.names)

    def monomial(self, exps: Mapping[str, int] | None = None, pi: int = 0, c: int = 1) -> "MPoly":
        key = [0] * (self.nvars + 1)
        key[0] = pi
        for n, e in (exps or {}).items():
            if e < 0:
                raise ValueError("negative variable exponent")
            key[self.slot(n)] += e
        return MPoly(self, {tuple(key): c})

    def const(self, c: Scalar) -> "MPoly":
        if isinstance(c, BaseElement):
            z = self._zero_key()
            return MPoly(self, {(e,) + z[1:]: v for e, v in c._c.items()}, trusted=True)
        return MPoly(self, {self._zero_key(): c})

    def __call__(self, x) -> "MPoly":
        if isinstance(x, MPoly):
            return x if x.ring == self else x.embed(self)
        if isinstance(x, str):
            return parse_poly(x, self)
        return self.const(x)

    def extend(self, names: Iterable[str]) -> "PolyRing":
        extra = [n for n in names if n not in self._index]
        return PolyRing(self.p, self.names + tuple(extra))


class MPoly:
    """Sparse polynomial: exponent tuple ``(pi_exp, e_1, ..., e_n)`` -> residue."""

    __slots__ = ("ring", "terms", "_hash")

    def __init__(self, ring: PolyRing, terms: Mapping[tuple, int], trusted: bool = False):
        self.ring = ring
        if trusted:
            self.terms = terms
        else:
            p = ring.p
            n = ring.nvars + 1
            t = {}
            for k, v in terms.items():
                k = tuple(k)
                if len(k) != n:
                    raise ValueError(f"exponent vector {k} does not match ring {ring.names}")
                if any(e < 0 for e in k[1:]):
                    raise ValueError("negative variable exponent")
                v %= p
                if v:
                    t[k] = (t.get(k, 0) + v) % p
                    if not t[k]:
                        del t[k]
            self.terms = t
        self._hash = None

    @property
    def p(self) -> int:
        return self.ring.p

    # -- coercion ----------------------------------------------------------

    def _coerce(self, other) -> "MPoly":
        if isinstance(other, MPoly):
            if other.ring != self.ring:
                raise ValueError(f"ring mismatch: {self.ring.names} vs {other.ring.names}")
            return other
        if isinstance(other, (int, BaseElement)):
            return self.ring.const(other)
        return NotImplemented

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return MPoly(self.ring, _k.add_terms(self.terms, other.terms, self.p), trusted=True)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return MPoly(self.ring, _k.add_terms(self.terms, other.terms, self.p, -1), trusted=True)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __neg__(self):
        return MPoly(self.ring, _k.scale_terms(self.terms, -1, self.p), trusted=True)

    def __mul__(self, other):
        if isinstance(other, int):
            return MPoly(self.ring, _k.scale_terms(self.terms, other, self.p), trusted=True)
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return MPoly(self.ring, _k.mul_terms(self.terms, other.terms, self.p), trusted=True)

    __rmul__ = __mul__

    def frobenius(self, times: int = 1) -> "MPoly":
        """The p^times-th power, computed termwise (characteristic p)."""
        q = self.p ** times
        return MPoly(self.ring, {tuple(e * q for e in k): c for k, c in self.terms.items()},
                     trusted=True)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a non-negative integer")
        p = self.p
        result = self.ring.one
        base = self
        while n:
            n, d = divmod(n, p)
            for _ in range(d):
                result = result * base
            if n:
                base = base.frobenius()
        return result

    def shift_pi(self, k: int) -> "MPoly":
        shift = (k,) + (0,) * self.ring.nvars
        return MPoly(self.ring, _k.shift_terms(self.terms, shift), trusted=True)

    # -- comparison --------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, BaseElement)):
            other = self.ring.const(other)
        if not isinstance(other, MPoly):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    # -- inspection --------------------------------------------------------

    def is_constant(self) -> bool:
        return all(not any(k[1:]) for k in self.terms)

    def as_base(self) -> BaseElement:
        if not self.is_constant():
            raise ValueError(f"{self} is not a constant")
        return BaseElement._raw(self.p, {k[0]: c for k, c in self.terms.items()})

    def variables(self) -> tuple[str, ...]:
        used = set()
        for k in self.terms:
            used.update(i for i, e in enumerate(k[1:]) if e)
        return tuple(self.ring.names[i] for i in sorted(used))

    def degree_in(self, name: str) -> int:
        s = self.ring.slot(name)
        return max((k[s] for k in self.terms), default=-1)

    def pi_valuation(self):
        return min((k[0] for k in self.terms), default=INFINITY)

    def is_integral(self) -> bool:
        return self.pi_valuation() >= 0

    def mod_pi(self) -> "MPoly":
        """Reduction modulo pi (constant term in pi of each coefficient)."""
        if not self.is_integral():
            raise ValueError(f"{self} is not integral; cannot reduce mod pi")
        return MPoly(self.ring, {k: c for k, c in self.terms.items() if k[0] == 0}, trusted=True)

    def base_coefficients(self) -> dict[tuple, BaseElement]:
        """Variable exponent vector -> BaseElement coefficient."""
        acc: dict[tuple, dict[int, int]] = {}
        for k, c in self.terms.items():
            acc.setdefault(k[1:], {})[k[0]] = c
        return {m: BaseElement._raw(self.p, d) for m, d in acc.items()}

    def coefficient(self, exps: Mapping[str, int] | None = None) -> BaseElement:
        key = [0] * self.ring.nvars
        for n, e in (exps or {}).items():
            key[self.ring.slot(n) - 1] = e
        key = tuple(key)
        return BaseElement._raw(self.p, {k[0]: c for k, c in self.terms.items() if k[1:] == key})

    def split(self, names: Sequence[str]) -> dict[tuple, "MPoly"]:
        """Expand on monomials in ``names``: ``{exps: coefficient}``.

        Coefficients live in the same ring and do not involve ``names``.
        """
        slots = [self.ring.slot(n) for n in names]
        out: dict[tuple, dict] = {}
        for k, c in self.terms.items():
            m = tuple(k[s] for s in slots)
            rest = list(k)
            for s in slots:
                rest[s] = 0
            out.setdefault(m, {})[tuple(rest)] = c
        return {m: MPoly(self.ring, t, trusted=True) for m, t in out.items()}

    # -- ring changes ------------------------------------------------------

    def embed(self, ring: PolyRing) -> "MPoly":
        """Same polynomial read in ``ring`` (variables matched by name)."""
        if ring == self.ring:
            return self
        if ring.p != self.p:
            raise ValueError("characteristic mismatch")
        used = set(self.variables())
        target = [ring.slot(n) if n in used else 0 for n in self.ring.names]
        n = ring.nvars + 1
        out = {}
        for k, c in self.terms.items():
            key = [0] * n
            key[0] = k[0]
            for i, e in enumerate(k[1:]):
                if e:
                    key[target[i]] = e
            out[tuple(key)] = c
        return MPoly(ring, out, trusted=True)

    def subs(self, mapping: Mapping[str, "MPoly | Scalar"], ring: PolyRing | None = None,
             reducer: "RewriteSystem | None" = None) -> "MPoly":
        """Algebra homomorphism: substitute variables, fix pi.

        Variables absent from ``mapping`` go to the same-named variable of
        the target ring.  With ``reducer`` every partial product is reduced
        to normal form, which keeps large substitutions small.
        """
        ring = ring or (reducer.ring if reducer else self.ring)
        images = []
        for name in self.ring.names:
            if name in mapping:
                img = mapping[name]
                images.append(img.embed(ring) if isinstance(img, MPoly) else ring.const(img))
            else:
                images.append(ring.gen(name) if name in ring else None)
        mul = reducer.mul if reducer else (lambda a, b: a * b)
        powers: dict[tuple[int, int], MPoly] = {}

        def power(i: int, e: int) -> MPoly:
            key = (i, e)
            if key not in powers:
                if images[i] is None:
                    raise KeyError(f"no image for variable {self.ring.names[i]!r}")
                powers[key] = reducer.pow(images[i], e) if reducer else images[i] ** e
            return powers[key]

        acc: dict = {}
        for k, c in self.terms.items():
            term = ring.monomial(pi=k[0], c=c)
            for i, e in enumerate(k[1:]):
                if e:
                    term = mul(term, power(i, e))
            _k.accumulate(acc, term.terms, 1)
        return MPoly(ring, _k.finish(acc, ring.p), trusted=True)

    # -- printing ----------------------------------------------------------

    def sorted_terms(self) -> list[tuple[tuple, int]]:
        return sorted(self.terms.items(), key=lambda kv: (tuple(-e for e in kv[0][1:]), kv[0][0]))

    def __str__(self):
        if not self.terms:
            return "0"
        names = self.ring.names
        out = []
        for k, c in self.sorted_terms():
            factors = [(names[i], e) for i, e in enumerate(k[1:]) if e]
            out.append(_format_term(c, k[0], factors))
        return " + ".join(out)

    def __repr__(self):
        return f"MPoly({self})"


# ---------------------------------------------------------------------------
# Triangular p-th power rewriting


class RewriteSystem:
    """Rules ``x^p -> rhs`` defining a quotient of a polynomial ring.

    The rule variables are taken in ``order``; the rule for the i-th variable
    may only mention rule variables at or below position i (and free
    variables), and must have degree < p in its own variable.  Such a system
    is a Groebner basis, so normal forms (all rule-variable exponents < p)
    are unique.
    """

    def __init__(self, ring: PolyRing, rules: Mapping[str, MPoly | Scalar],
                 order: Sequence[str] | None = None):
        self.ring = ring
        p = ring.p
        order = tuple(order) if order is not None else tuple(n for n in ring.names if n in rules)
        if set(order) != set(rules):
            raise ValueError("rule order must list exactly the rule variables")
        self.order = order
        self.rules: dict[str, MPoly] = {}
        for i, name in enumerate(order):
            rhs = rules[name]
            rhs = rhs.embed(ring) if isinstance(rhs, MPoly) else ring.const(rhs)
            used = rhs.variables()
            for later in order[i + 1:]:
                if later in used:
                    raise ValueError(
                        f"rewrite system is not triangular: rule for {name} mentions {later}")
            if rhs.degree_in(name) >= p:
                raise ValueError(f"rule for {name} has degree >= p in {name}")
            self.rules[name] = rhs
        self._kernel_rules = tuple((ring.slot(n), self.rules[n].terms) for n in reversed(order))
        self._cache: dict = {}

    @property
    def p(self) -> int:
        return self.ring.p

    def normal_form(self, q: MPoly) -> MPoly:
        if q.ring != self.ring:
            q = q.embed(self.ring)
        return MPoly(self.ring, _k.reduce_terms(q.terms, self._kernel_rules, self.p, self._cache),
                     trusted=True)

    __call__ = normal_form

    def mul(self, a: MPoly, b: MPoly) -> MPoly:
        return self.normal_form(a * b)

    def pow(self, a: MPoly, n: int) -> MPoly:
        p = self.p
        a = self.normal_form(a)
        result = self.ring.one
        while n:
            n, d = divmod(n, p)
            for _ in range(d):
                result = self.mul(result, a)
            if n:
                a = self.normal_form(a.frobenius())
        return result

    def is_normal(self, q: MPoly) -> bool:
        slots = [self.ring.slot(n) for n in self.order]
        return all(k[s] < self.p for k in q.terms for s in slots)

    def reduce_with(self, q: MPoly, choose: Callable[[list], object]) -> MPoly:
        """Normal form by single rewrite steps, ``choose`` picking the redex.

        ``choose`` receives the list of ``(key, slot)`` redexes and returns
        one of them.  No caching; meant for checking confluence.
        """
        p = self.p
        rules = {self.ring.slot(n): self.rules[n].terms for n in self.order}
        terms = dict(q.embed(self.ring).terms)
        while True:
            redexes = [(k, s) for k in terms for s in rules if k[s] >= p]
            if not redexes:
                return MPoly(self.ring, terms, trusted=True)
            key, slot = choose(redexes)
            c = terms.pop(key)
            base = list(key)
            base[slot] -= p
            for kr, cr in rules[slot].items():
                kk = tuple(x + y for x, y in zip(base, kr))
                v = (terms.get(kk, 0) + c * cr) % p
                if v:
                    terms[kk] = v
                else:
                    terms.pop(kk, None)

    def reduce_random(self, q: MPoly, rng: random.Random) -> MPoly:
        return self.reduce_with(q, lambda redexes: redexes[rng.randrange(len(redexes))])

    def basis(self) -> list[MPoly]:
        """Monomial basis of the quotient when every variable has a rule."""
        if set(self.order) != set(self.ring.names):
            raise ValueError("quotient is not finite over the base: free variables present")
        return [self.ring.monomial(dict(zip(self.ring.names, e))) for e in self.basis_exponents()]

    def basis_exponents(self) -> list[tuple[int, ...]]:
        p, n = self.p, self.ring.nvars
        return [tuple(reversed(_digits(i, p, n))) for i in range(p ** n)]


def _digits(i: int, base: int, n: int) -> list[int]:
    out = []
    for _ in range(n):
        i, d = divmod(i, base)
        out.append(d)
    return out


def normal_form(q: MPoly, rs: RewriteSystem) -> MPoly:
    return rs.normal_form(q)


# ---------------------------------------------------------------------------
# Lattices over the valuation ring


class LatticeError(ValueError):
    pass


def _lead(v: Sequence[BaseElement]) -> int | None:
    for i, x in enumerate(v):
        if x:
            return i
    return None


def _normalize_row(v: list[BaseElement], col: int) -> list[BaseElement]:
    inv = v[col].inverse_residue()
    if inv == 1:
        return v
    return [x * inv for x in v]


def _eliminate(v: list[BaseElement], row: Sequence[BaseElement], col: int) -> list[BaseElement]:
    """Clear ``v[col]`` using ``row`` whose pivot sits at ``col``.

    ``row[col] = pi^e * alpha`` with ``alpha`` a unit of R; the result is
    ``alpha*v - (v[col]/pi^e)*row``.  Multiplying by a unit does not change
    the R-span, so the operation is invertible over R.  The quotient
    ``v[col]/pi^e`` is integral whenever ``v[col]`` has valuation >= e.
    """
    a = row[col]
    e = a.valuation()
    alpha = a.shift(-e)
    beta = v[col].shift(-e)
    if alpha == 1:
        out = [x - beta * r if r else x for x, r in zip(v, row)]
    else:
        out = [alpha * x - beta * r for x, r in zip(v, row)]
    out[col] = BaseElement._raw(a.p, {})
    return out


def _back_reduce(rows: list, pivots: Sequence[int]) -> list:
    """Hermite reduction above pivots.

    Wherever a pivot is exactly ``pi^e``, every entry above it keeps only its
    terms of pi-degree < e; the rest is cleared with an integral multiple of
    the pivot row.  Columns are handled left to right, so a later pivot row
    (zero left of its pivot) never disturbs an earlier reduced column.
    """
    rows = [list(r) for r in rows]
    for i, c in enumerate(pivots):
        a = rows[i][c]
        if len(a._c) != 1 or a.lowest_coefficient() != 1:
            continue
        e = a.valuation()
        for j in range(i):
            x = rows[j][c]
            q = {k - e: v for k, v in x._c.items() if k >= e}
            if q:
                q = BaseElement._raw(a.p, q)
                rows[j] = [y - q * z if z else y for y, z in zip(rows[j], rows[i])]
    return [tuple(r) for r in rows]


class Lattice:
    """Echelon basis of an R-submodule of R^n, R = F_p[pi] localized at pi.

    Rows are in echelon form with strictly increasing pivot columns; each
    pivot entry has lowest pi-coefficient 1, so it is ``pi^e`` times a unit
    (exactly ``pi^e`` whenever the inputs are pi-monomial).  Above a pivot
    ``pi^e`` every entry is zero or has valuation < e, which makes the rows
    canonical when all pivots are pi-powers.  Row operations only ever
    multiply by units of R, so the span is preserved exactly.
    """

    def __init__(self, basis: Sequence, rows: Sequence[Sequence[BaseElement]] = (),
                 pivots: Sequence[int] = (), p: int | None = None):
        self.basis = tuple(basis)
        self.rows = tuple(tuple(r) for r in rows)
        self.pivots = tuple(pivots)
        self.p = p

    @property
    def rank(self) -> int:
        return len(self.rows)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def pivot_valuations(self) -> list[int]:
        return [r[c].valuation() for r, c in zip(self.rows, self.pivots)]

    def _check(self, v: Sequence[BaseElement]) -> list[BaseElement]:
        if len(v) != self.dim:
            raise LatticeError(f"vector of length {len(v)} in ambient module of rank {self.dim}")
        return list(v)

    def add(self, v: Sequence[BaseElement]) -> "Lattice":
        """Lattice spanned by self and ``v``."""
        v = self._check(v)
        if not all(x.is_integral() for x in v):
            raise LatticeError("denominators not cleared")
        rows, pivots = list(self.rows), list(self.pivots)
        new_rows: list = []
        new_piv: list = []
        changed = False
        i = 0
        while True:
            lead = _lead(v)
            if lead is None:
                if not changed:
                    return self
                new_rows.extend(rows[i:])
                new_piv.extend(pivots[i:])
                break
            while i < len(rows) and pivots[i] < lead:
                new_rows.append(rows[i])
                new_piv.append(pivots[i])
                i += 1
            if i < len(rows) and pivots[i] == lead:
                r = rows[i]
                if v[lead].valuation() >= r[lead].valuation():
                    v = _eliminate(v, r, lead)
                    new_rows.append(r)
                else:
                    v = _normalize_row(v, lead)
                    r, v = v, _eliminate(list(r), v, lead)
                    changed = True
                    new_rows.append(tuple(r))
                new_piv.append(lead)
                i += 1
            else:
                new_rows.append(tuple(_normalize_row(v, lead)))
                new_piv.append(lead)
                new_rows.extend(rows[i:])
                new_piv.extend(pivots[i:])
                break
        return Lattice(self.basis, _back_reduce(new_rows, new_piv), new_piv, self.p)

    def _reduce(self, v: list[BaseElement]):
        """Reduce ``v`` through the rows; yields (required scaling, residual)."""
        need = -INFINITY
        for r, c in zip(self.rows, self.pivots):
            lead = _lead(v)
            if lead is None:
                break
            if lead < c:
                return need, v
            if lead > c:
                continue
            need = max(need, r[c].valuation() - v[c].valuation())
            v = _eliminate(v, r, c)
        return need, v

    def contains(self, v: Sequence[BaseElement]) -> bool:
        need, rest = self._reduce(self._check(v))
        return _lead(rest) is None and need <= 0

    __contains__ = contains

    def min_scaling(self, v: Sequence[BaseElement]):
        """Least integer s with pi^s * v in the lattice, or None if v is
        not in the K-span.  Raises for the zero vector."""
        v = self._check(v)
        if _lead(v) is None:
            raise LatticeError("min_scaling of the zero vector is undefined")
        need, rest = self._reduce(v)
        if _lead(rest) is not None:
            return None
        return int(need)

    def __le__(self, other: "Lattice") -> bool:
        return self.basis == other.basis and all(other.contains(r) for r in self.rows)

    def __eq__(self, other):
        if not isinstance(other, Lattice):
            return NotImplemented
        return self <= other and other <= self

    __hash__ = None

    def __repr__(self):
        return f"Lattice(rank={self.rank}, dim={self.dim}, pivot_valuations={self.pivot_valuations()})"


def lattice_reduce(vectors: Iterable[Sequence[BaseElement]], basis: Sequence | None = None,
                   p: int | None = None) -> Lattice:
    """Echelon form over R of the span of ``vectors``.

    Entries must be integral; callers clear pi-denominators first.
    """
    vectors = [list(v) for v in vectors]
    if basis is None:
        if not vectors:
            raise LatticeError("cannot infer the ambient basis from no vectors")
        basis = tuple(range(len(vectors[0])))
    if p is None and vectors and vectors[0]:
        p = vectors[0][0].p
    L = Lattice(basis, p=p)
    for v in vectors:
        if not all(x.is_integral() for x in v):
            raise LatticeError("denominators not cleared")
        L = L.add(v)
    return L


def lattice_contains(L: Lattice, row: Sequence[BaseElement]) -> bool:
    return L.contains(row)


def kernel_lattice(images: Sequence[Sequence[BaseElement]], basis: Sequence | None = None) -> Lattice:
    """R-module of x in R^n with sum_i x_i * images[i] = 0.

    Echelonizes the augmented rows ``[image_i | e_i]``; the rows whose pivot
    lands in the identity block form a basis of the kernel.
    """
    n = len(images)
    if n == 0:
        raise LatticeError("empty map")
    m = len(images[0])
    p = next((x.p for row in images for x in row), None)
    zero = BaseElement(p)
    one = BaseElement.const(p, 1)
    aug = Lattice(range(m + n), p=p)
    for i, img in enumerate(images):
        unit = [zero] * n
        unit[i] = one
        aug = aug.add(list(img) + unit)
    rows = [r[m:] for r, c in zip(aug.rows, aug.pivots) if c >= m]
    pivots = [c - m for c in aug.pivots if c >= m]
    return Lattice(basis if basis is not None else range(n), rows, pivots, p)


def vector_of(q: MPoly, basis_keys: Sequence[tuple]) -> list[BaseElement]:
    """Coordinates of ``q`` on monomials given by variable exponent tuples."""
    coeffs = q.base_coefficients()
    extra = set(coeffs) - set(basis_keys)
    if extra:
        raise LatticeError(f"{q} has monomials outside the basis: {sorted(extra)[:3]}")
    zero = BaseElement(q.p)
    return [coeffs.get(k, zero) for k in basis_keys]


def poly_of(v: Sequence[BaseElement], basis_keys: Sequence[tuple], ring: PolyRing) -> MPoly:
    terms = {}
    for x, k in zip(v, basis_keys):
        for e, c in x._c.items():
            terms[(e,) + tuple(k)] = c
    return MPoly(ring, terms, trusted=True)


# ---------------------------------------------------------------------------
# Text syntax

_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\^)|(\*)|(\+)|(-))")


class ParseError(ValueError):
    pass


def _tokens(text: str) -> list[tuple[str, str]]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character at {pos} in {text!r}")
        kinds = ("int", "name", "^", "*", "+", "-")
        for kind, g in zip(kinds, m.groups()):
            if g is not None:
                out.append((kind, g))
                break
        pos = m.end()
    return out


def _parse_terms(text: str) -> list[tuple[int, int, dict[str, int]]]:
    """List of (integer coefficient, pi exponent, {name: exponent})."""
    toks = _tokens(text)
    if not toks:
        raise ParseError("empty expression")
    terms = []
    i = 0
    sign = 1
    if toks[0][0] == "-":
        sign, i = -1, 1
    elif toks[0][0] == "+":
        i = 1
    while True:
        coeff, pi_exp, exps = sign, 0, {}
        expect_factor = True
        while expect_factor:
            if i >= len(toks):
                raise ParseError(f"expression ends early: {text!r}")
            kind, val = toks[i]
            i += 1
            if kind == "int":
                base = int(val)
                if i < len(toks) and toks[i][0] == "^":
                    e, i = _exponent(toks, i + 1, text)
                    if e < 0:
                        raise ParseError("negative powers only allowed for pi")
                    base = base ** e
                coeff *= base
            elif kind == "name":
                e = 1
                if i < len(toks) and toks[i][0] == "^":
                    e, i = _exponent(toks, i + 1, text)
                if val == "pi":
                    pi_exp += e
                else:
                    if e < 0:
                        raise ParseError(f"negative power of {val}")
                    exps[val] = exps.get(val, 0) + e
            else:
                raise ParseError(f"unexpected {val!r} in {text!r}")
            if i < len(toks) and toks[i][0] == "*":
                i += 1
            else:
                expect_factor = False
        terms.append((coeff, pi_exp, exps))
        if i >= len(toks):
            return terms
        kind, val = toks[i]
        if kind not in "+-":
            raise ParseError(f"unexpected {val!r} in {text!r}")
        sign = 1 if kind == "+" else -1
        i += 1


def _exponent(toks, i, text) -> tuple[int, int]:
    neg = False
    if i < len(toks) and toks[i][0] == "-":
        neg, i = True, i + 1
    if i >= len(toks) or toks[i][0] != "int":
        raise ParseError(f"malformed exponent in {text!r}")
    e = int(toks[i][1])
    return (-e if neg else e), i + 1


def expression_names(text: str) -> list[str]:
    names = []
    for _, _, exps in _parse_terms(text):
        for n in exps:
            if n not in names:
                names.append(n)
    return names


def parse_poly(text: str, ring: PolyRing) -> MPoly:
    acc = ring.zero
    for c, e, exps in _parse_terms(text):
        try:
            acc = acc + ring.monomial(exps, pi=e, c=c)
        except KeyError as exc:
            raise ParseError(str(exc)) from None
    return acc


def parse_base(text: str, p: int) -> BaseElement:
    acc = BaseElement(p)
    for c, e, exps in _parse_terms(text):
        if exps:
            raise ParseError(f"scalar expression may only involve pi: {text!r}")
        acc = acc + BaseElement(p, {e: c})
    return acc


def natural_key(name: str):
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", name)]
