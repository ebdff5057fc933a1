"""Length-2 Witt vectors and their twisted forms W_2^lambda.

All maps act on :class:`WittPair` values with polynomial coordinates, so
each identity (associativity, homomorphism property, ...) is checked as an
exact polynomial identity in fresh variables.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Callable

from .ring_core import BaseElement, Check, MPoly, PolyRing, Scalar, check_prime


@dataclass(frozen=True)
class WittPair:
    first: MPoly
    second: MPoly

    def __post_init__(self):
        if self.first.ring != self.second.ring:
            raise ValueError("Witt coordinates must live in the same ring")

    @property
    def ring(self) -> PolyRing:
        return self.first.ring

    @classmethod
    def of(cls, ring: PolyRing, first, second) -> "WittPair":
        return cls(ring(first), ring(second))

    @classmethod
    def zero(cls, ring: PolyRing) -> "WittPair":
        return cls(ring.zero, ring.zero)

    def map(self, f: Callable[[MPoly], MPoly]) -> "WittPair":
        return WittPair(f(self.first), f(self.second))

    def is_zero(self) -> bool:
        return self.first.is_zero() and self.second.is_zero()

    def __iter__(self):
        return iter((self.first, self.second))

    def __str__(self):
        return f"({self.first}, {self.second})"

    def to_json(self) -> dict:
        return {"first": str(self.first), "second": str(self.second)}


@dataclass(frozen=True)
class TwistParams:
    lambda_: BaseElement
    mu: BaseElement
    nu: BaseElement


def witt_binom(p: int, k: int) -> int:
    """C(p, k)/p reduced mod p, for 1 <= k <= p-1."""
    check_prime(p)
    if not 1 <= k <= p - 1:
        raise ValueError(f"k must lie in [1, {p - 1}], got {k}")
    q, r = divmod(comb(p, k), p)
    assert r == 0
    return q % p


def _scalar(p: int, x: Scalar) -> BaseElement:
    return x if isinstance(x, BaseElement) else BaseElement.const(p, x)


def cocycle(x: MPoly, y: MPoly) -> MPoly:
    """sum_{k=1}^{p-1} <p,k> x^k y^(p-k)."""
    p = x.p
    xs = [x.ring.one]
    ys = [y.ring.one]
    for _ in range(p - 1):
        xs.append(xs[-1] * x)
        ys.append(ys[-1] * y)
    acc = x.ring.zero
    for k in range(1, p):
        acc = acc + xs[k] * ys[p - k] * witt_binom(p, k)
    return acc


def w2_add(lam: Scalar, a: WittPair, b: WittPair) -> WittPair:
    """Group law of W_2^lambda; lambda = 1 is ordinary Witt addition."""
    lam = _scalar(a.ring.p, lam)
    return WittPair(a.first + b.first,
                    a.second + b.second + cocycle(a.first, b.first) * lam)


def w2_neg(lam: Scalar, a: WittPair) -> WittPair:
    # Solving a + v = 0: v1 = -a1 and a2 + v2 + lam*c(a1, -a1) = 0.
    lam = _scalar(a.ring.p, lam)
    v1 = -a.first
    return WittPair(v1, -a.second - cocycle(a.first, v1) * lam)


def w2_sub(lam: Scalar, a: WittPair, b: WittPair) -> WittPair:
    return w2_add(lam, a, w2_neg(lam, b))


def frobenius(lam: Scalar, a: WittPair) -> WittPair:
    """F_lambda : W_2^lambda -> W_2^(lambda^p), coordinatewise p-th power."""
    return WittPair(a.first.frobenius(), a.second.frobenius())


def scalar_map(lam: Scalar, mu: Scalar, nu: Scalar, a: WittPair) -> WittPair:
    """I_{lambda,mu}^nu : W_2^lambda -> W_2^(lambda*mu), (u1,u2) -> (nu u1, mu nu^p u2)."""
    p = a.ring.p
    mu, nu = _scalar(p, mu), _scalar(p, nu)
    return WittPair(a.first * nu, a.second * (mu * nu ** p))


def phi(lam: Scalar, nu: Scalar, a: WittPair) -> WittPair:
    """phi_{lambda,nu} = F_lambda - I_{lambda,lambda^(p-1)}^nu, via subtraction in W_2^(lambda^p)."""
    p = a.ring.p
    lam = _scalar(p, lam)
    return w2_sub(lam ** p, frobenius(lam, a), scalar_map(lam, lam ** (p - 1), nu, a))


def phi_closed_form(lam: Scalar, nu: Scalar, a: WittPair) -> WittPair:
    """The expanded formula for phi_{lambda,nu}(u1, u2):

    (u1^p - nu u1, u2^p - nu^p lambda^(p-1) u2 + lambda^p sum <p,k> u1^(pk) (-nu u1)^(p-k)).
    Agrees with :func:`phi` for odd p only; at p = 2 the two differ by
    lambda^2 nu^2 u1^2.
    """
    p = a.ring.p
    lam, nu = _scalar(p, lam), _scalar(p, nu)
    u1, u2 = a
    second = u2.frobenius() - u2 * (nu ** p * lam ** (p - 1)) \
        + cocycle(u1.frobenius(), -(u1 * nu)) * lam ** p
    return WittPair(u1.frobenius() - u1 * nu, second)


# ---------------------------------------------------------------------------
# Identity checks


def _residual(lhs: WittPair, rhs: WittPair) -> WittPair:
    return WittPair(lhs.first - rhs.first, lhs.second - rhs.second)


def fresh_pairs(p: int, count: int, stems: str = "abcdef") -> tuple[PolyRing, list[WittPair]]:
    names = [f"{s}{i}" for s in stems[:count] for i in (1, 2)]
    ring = PolyRing(p, names)
    pairs = [WittPair(ring.gen(f"{s}1"), ring.gen(f"{s}2")) for s in stems[:count]]
    return ring, pairs


def check_hom(fn: Callable[[WittPair], WittPair], source: Scalar, target: Scalar, p: int,
              name: str = "hom") -> Check:
    """fn(a +_source b) == fn(a) +_target fn(b) in four fresh variables."""
    _, (a, b) = fresh_pairs(p, 2)
    res = _residual(fn(w2_add(source, a, b)), w2_add(target, fn(a), fn(b)))
    return Check(res.is_zero(), name, None if res.is_zero() else res)


def check_associative(lam: Scalar, p: int) -> Check:
    _, (a, b, c) = fresh_pairs(p, 3)
    res = _residual(w2_add(lam, w2_add(lam, a, b), c), w2_add(lam, a, w2_add(lam, b, c)))
    return Check(res.is_zero(), "associativity", None if res.is_zero() else res)


def check_commutative(lam: Scalar, p: int) -> Check:
    _, (a, b) = fresh_pairs(p, 2)
    res = _residual(w2_add(lam, a, b), w2_add(lam, b, a))
    return Check(res.is_zero(), "commutativity", None if res.is_zero() else res)


def check_identity(lam: Scalar, p: int) -> Check:
    ring, (a,) = fresh_pairs(p, 1)
    z = WittPair.zero(ring)
    res = _residual(w2_add(lam, a, z), a)
    res2 = _residual(w2_add(lam, z, a), a)
    ok = res.is_zero() and res2.is_zero()
    return Check(ok, "identity", None if ok else (res, res2))


def check_negation(lam: Scalar, p: int) -> Check:
    ring, (a,) = fresh_pairs(p, 1)
    res = w2_add(lam, a, w2_neg(lam, a))
    return Check(res.is_zero(), "negation", None if res.is_zero() else res)


def check_cocycle(p: int) -> Check:
    """c(x,y) + c(x+y,z) == c(y,z) + c(x,y+z)."""
    ring = PolyRing(p, ["x", "y", "z"])
    x, y, z = ring.gens()
    res = cocycle(x, y) + cocycle(x + y, z) - cocycle(y, z) - cocycle(x, y + z)
    return Check(res.is_zero(), "cocycle", None if res.is_zero() else res)


def check_phi_closed_form(lam: Scalar, nu: Scalar, p: int) -> Check:
    ring, (a,) = fresh_pairs(p, 1)
    res = _residual(phi(lam, nu, a), phi_closed_form(lam, nu, a))
    return Check(res.is_zero(), "phi closed form", None if res.is_zero() else res)
