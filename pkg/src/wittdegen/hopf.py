"""Hopf algebras of rank-p^n group schemes presented by p-th power relations.

A presentation is ``R[g_1..g_n]/(g_i^p - c_i g_i)`` with a comultiplication
written in doubled variables (``uL1`` for u1 (x) 1, ``uR1`` for 1 (x) u1)
and a counit.  The constructors cover (Z/p^2)_R and the kernels K_{lambda,nu}
of the twisted isogenies; every axiom is checked by normal-form computation
in the appropriate tensor power.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

from .ring_core import BaseElement, Check, MPoly, PolyRing, RewriteSystem, Scalar, check_prime
from .witt2 import WittPair, cocycle, w2_add, w2_neg, witt_binom


class UnsupportedPrime(ValueError):
    pass


class HopfError(ValueError):
    pass


_NAME_SPLIT = re.compile(r"(.*?)(\d*)\Z")


def copy_name(name: str, tag: str) -> str:
    """``copy_name('u1', 'L') == 'uL1'``."""
    stem, idx = _NAME_SPLIT.match(name).groups()
    return f"{stem}{tag}{idx}"


def _b(p: int, x: Scalar) -> BaseElement:
    return x if isinstance(x, BaseElement) else BaseElement.const(p, x)


@dataclass(frozen=True, eq=False)
class HopfPresentation:
    p: int
    generators: tuple[str, ...]
    relation_constants: tuple[BaseElement, ...]
    comul: Mapping[str, MPoly]
    counit: Mapping[str, BaseElement]
    over_residue_field: bool = False
    label: str = field(default="", compare=False)

    def __post_init__(self):
        check_prime(self.p)
        if len(self.relation_constants) != len(self.generators):
            raise HopfError("one relation constant per generator")
        if set(self.comul) != set(self.generators) or set(self.counit) != set(self.generators):
            raise HopfError("comultiplication and counit must be given on every generator")
        comul = {g: self.comul[g].embed(self.ring2) for g in self.generators}
        object.__setattr__(self, "comul", comul)
        object.__setattr__(self, "relation_constants",
                           tuple(_b(self.p, c) for c in self.relation_constants))
        object.__setattr__(self, "counit", {g: _b(self.p, self.counit[g]) for g in self.generators})

    def __eq__(self, other):
        if not isinstance(other, HopfPresentation):
            return NotImplemented
        return (self.p, self.generators, self.relation_constants, self.comul, self.counit,
                self.over_residue_field) == (other.p, other.generators, other.relation_constants,
                                             other.comul, other.counit, other.over_residue_field)

    __hash__ = None

    # -- rings -------------------------------------------------------------

    def names(self, *tags: str) -> tuple[str, ...]:
        if not tags:
            return self.generators
        return tuple(copy_name(g, t) for t in tags for g in self.generators)

    @cached_property
    def ring(self) -> PolyRing:
        return PolyRing(self.p, self.generators)

    @cached_property
    def ring2(self) -> PolyRing:
        return PolyRing(self.p, self.names("L", "R"))

    @cached_property
    def ring3(self) -> PolyRing:
        return PolyRing(self.p, self.names("L", "M", "R"))

    def relation_rules(self, ring: PolyRing, tags: tuple[str, ...] = ()) -> dict[str, MPoly]:
        rules = {}
        for t in tags or ("",):
            for g, c in zip(self.generators, self.relation_constants):
                name = copy_name(g, t) if t else g
                rules[name] = ring.gen(name) * c
        return rules

    @cached_property
    def rs(self) -> RewriteSystem:
        return RewriteSystem(self.ring, self.relation_rules(self.ring))

    @cached_property
    def rs2(self) -> RewriteSystem:
        return RewriteSystem(self.ring2, self.relation_rules(self.ring2, ("L", "R")))

    @cached_property
    def rs3(self) -> RewriteSystem:
        return RewriteSystem(self.ring3, self.relation_rules(self.ring3, ("L", "M", "R")))

    # -- structure ---------------------------------------------------------

    @property
    def rank(self) -> int:
        return len(self.rs.basis_exponents())

    def basis_keys(self) -> list[tuple[int, ...]]:
        return self.rs.basis_exponents()

    def is_integral(self) -> bool:
        return (all(c.is_integral() for c in self.relation_constants)
                and all(d.is_integral() for d in self.comul.values())
                and all(e.is_integral() for e in self.counit.values()))

    def comul_in(self, left: str, right: str, ring: PolyRing) -> dict[str, MPoly]:
        """Delta(g) with the two tensor slots renamed to copies ``left``/``right``."""
        out = {}
        for g in self.generators:
            ren = {copy_name(h, "L"): ring.gen(copy_name(h, left) if left else h)
                   for h in self.generators}
            ren.update({copy_name(h, "R"): ring.gen(copy_name(h, right) if right else h)
                        for h in self.generators})
            out[g] = self.comul[g].subs(ren, ring=ring)
        return out

    def counit_of(self, x: MPoly) -> BaseElement:
        return x.subs(dict(self.counit), ring=self.ring).as_base() if x.ring == self.ring \
            else x.embed(self.ring).subs(dict(self.counit), ring=self.ring).as_base()

    def to_json(self) -> dict:
        return {
            "generators": list(self.generators),
            "relation_constants": [str(c) for c in self.relation_constants],
            "comul": {g: str(self.comul[g]) for g in self.generators},
            "counit": {g: str(self.counit[g]) for g in self.generators},
            "rank": self.rank,
        }


# ---------------------------------------------------------------------------
# Constructors


def witt_presentation(p: int, lam: Scalar, c1: Scalar, c2: Scalar,
                      names: tuple[str, str] = ("u1", "u2"), label: str = "") -> HopfPresentation:
    """R[g1,g2]/(g1^p - c1 g1, g2^p - c2 g2) with the W_2^lambda law."""
    ring2 = PolyRing(p, [copy_name(n, t) for t in ("L", "R") for n in names])
    left = WittPair(ring2.gen(copy_name(names[0], "L")), ring2.gen(copy_name(names[1], "L")))
    right = WittPair(ring2.gen(copy_name(names[0], "R")), ring2.gen(copy_name(names[1], "R")))
    s = w2_add(lam, left, right)
    zero = BaseElement(p)
    return HopfPresentation(p, tuple(names), (_b(p, c1), _b(p, c2)),
                            {names[0]: s.first, names[1]: s.second},
                            {names[0]: zero, names[1]: zero}, label=label)


def make_zp2(p: int) -> HopfPresentation:
    """R[Z/p^2] = R[u1,u2]/(u1^p - u1, u2^p - u2) with Witt comultiplication."""
    return witt_presentation(check_prime(p), 1, 1, 1, label="Z/p^2")


def make_kernel(lam: Scalar, nu: Scalar, p: int) -> HopfPresentation:
    """Hopf algebra of K_{lambda,nu} = ker(phi_{lambda,nu}), p > 2."""
    check_prime(p)
    if p == 2:
        raise UnsupportedPrime("the kernel presentation is only defined for odd p")
    lam, nu = _b(p, lam), _b(p, nu)
    return witt_presentation(p, lam, nu, nu ** p * lam ** (p - 1),
                             label=f"K_{{{lam},{nu}}}")


# ---------------------------------------------------------------------------
# Axioms


def check_coassoc(H: HopfPresentation) -> Check:
    """(Delta (x) id) Delta == (id (x) Delta) Delta on each generator."""
    r3, rs3 = H.ring3, H.rs3
    d_lm = H.comul_in("L", "M", r3)
    d_mr = H.comul_in("M", "R", r3)
    for g in H.generators:
        d = H.comul[g]
        lhs = d.subs({copy_name(h, "L"): d_lm[h] for h in H.generators}
                     | {copy_name(h, "R"): r3.gen(copy_name(h, "R")) for h in H.generators},
                     ring=r3, reducer=rs3)
        rhs = d.subs({copy_name(h, "L"): r3.gen(copy_name(h, "L")) for h in H.generators}
                     | {copy_name(h, "R"): d_mr[h] for h in H.generators},
                     ring=r3, reducer=rs3)
        res = rs3(lhs - rhs)
        if res:
            return Check(False, "coassociativity", res, g)
    return Check(True, "coassociativity")


def check_counit(H: HopfPresentation) -> Check:
    """(eps (x) id) Delta == id == (id (x) eps) Delta."""
    ring, rs = H.ring, H.rs
    for g in H.generators:
        d = H.comul[g]
        for kill, keep in (("L", "R"), ("R", "L")):
            m = {copy_name(h, kill): H.counit[h] for h in H.generators}
            m.update({copy_name(h, keep): ring.gen(h) for h in H.generators})
            res = rs(d.subs(m, ring=ring) - ring.gen(g))
            if res:
                return Check(False, "counit", res, f"{g} ({kill} side)")
    return Check(True, "counit")


def check_relations(H: HopfPresentation) -> Check:
    """Delta(g^p - c g) == 0 in the doubled quotient, i.e. Delta descends."""
    rs2 = H.rs2
    for g, c in zip(H.generators, H.relation_constants):
        d = H.comul[g]
        res = rs2(rs2.pow(d, H.p) - d * c)
        if res:
            return Check(False, "relations", res, g)
    # the counit must respect the relations too
    for g, c in zip(H.generators, H.relation_constants):
        e = H.counit[g]
        if e ** H.p - c * e:
            return Check(False, "relations", e ** H.p - c * e, f"counit({g})")
    return Check(True, "relations")


def witt_twist(H: HopfPresentation) -> BaseElement | None:
    """lambda when Delta is exactly the W_2^lambda law on (g1, g2), else None."""
    if len(H.generators) != 2:
        return None
    g1, g2 = H.generators
    r2 = H.ring2
    L = WittPair(r2.gen(copy_name(g1, "L")), r2.gen(copy_name(g2, "L")))
    R = WittPair(r2.gen(copy_name(g1, "R")), r2.gen(copy_name(g2, "R")))
    lam = H.comul[g2].coefficient({copy_name(g1, "L"): H.p - 1, copy_name(g1, "R"): 1})
    lam = lam * pow(witt_binom(H.p, H.p - 1), H.p - 2, H.p)
    s = w2_add(lam, L, R)
    if H.comul[g1] == s.first and H.comul[g2] == s.second:
        return lam
    return None


def _is_primitive(H: HopfPresentation, g: str) -> bool:
    r2 = H.ring2
    return H.comul[g] == r2.gen(copy_name(g, "L")) + r2.gen(copy_name(g, "R"))


def antipode(H: HopfPresentation) -> dict[str, MPoly]:
    """Coordinate form of group negation.

    Derived from the Witt negation for W_2^lambda-shaped presentations and
    as ``g -> -g`` when every generator is primitive.
    """
    ring = H.ring
    lam = witt_twist(H)
    if lam is not None:
        g1, g2 = H.generators
        neg = w2_neg(lam, WittPair(ring.gen(g1), ring.gen(g2)))
        return {g1: H.rs(neg.first), g2: H.rs(neg.second)}
    if all(_is_primitive(H, g) for g in H.generators):
        return {g: -ring.gen(g) for g in H.generators}
    raise HopfError("antipode is only derived for Witt-shaped or primitive presentations")


def check_antipode(H: HopfPresentation) -> Check:
    """m (S (x) id) Delta == eps == m (id (x) S) Delta on each generator."""
    try:
        S = antipode(H)
    except HopfError as exc:
        return Check(False, "antipode", str(exc))
    ring, rs = H.ring, H.rs
    for g in H.generators:
        d = H.comul[g]
        for s_side, id_side in (("L", "R"), ("R", "L")):
            m = {copy_name(h, s_side): S[h] for h in H.generators}
            m.update({copy_name(h, id_side): ring.gen(h) for h in H.generators})
            res = rs(d.subs(m, ring=ring, reducer=rs) - ring.const(H.counit[g]))
            if res:
                return Check(False, "antipode", res, f"{g} (S on {s_side})")
    return Check(True, "antipode")


def check_all(H: HopfPresentation) -> dict[str, Check]:
    return {
        "coassoc": check_coassoc(H),
        "counit": check_counit(H),
        "relations": check_relations(H),
        "antipode": check_antipode(H),
    }


# ---------------------------------------------------------------------------
# Special fibre and classification


@dataclass(frozen=True)
class FiberClass:
    """Name of a group scheme over k: EtaleZp, AlphaP, KernelForm, Product or Unknown."""

    tag: str
    params: tuple = ()

    TAGS = ("EtaleZp", "AlphaP", "KernelForm", "Product", "Unknown")

    def __post_init__(self):
        if self.tag not in self.TAGS:
            raise ValueError(f"unknown fibre tag {self.tag!r}")

    def __str__(self):
        if not self.params:
            return self.tag
        return f"{self.tag}({', '.join(str(x) for x in self.params)})"

    def describe(self) -> str:
        if self.tag == "KernelForm" and self.params == (1, 1):
            return f"{self} = constant Z/p^2"
        if self.tag == "Product" and all(f.tag == "AlphaP" for f in self.params):
            return f"{self} = (alpha_p)^{len(self.params)}"
        return str(self)


class NotOfKnownForm:
    """Returned by :func:`identify_kernel_form` when no (lambda, nu) fits."""

    def __init__(self, reason: str):
        self.reason = reason

    def __bool__(self):
        return False

    def __repr__(self):
        return f"NotOfKnownForm({self.reason!r})"


def special_fiber(H: HopfPresentation) -> HopfPresentation:
    """Reduction of an integral presentation modulo pi."""
    if not H.is_integral():
        raise HopfError("special fibre needs an integral model")
    return HopfPresentation(
        H.p, H.generators,
        tuple(c.mod_pi() for c in H.relation_constants),
        {g: d.mod_pi() for g, d in H.comul.items()},
        {g: e.mod_pi() for g, e in H.counit.items()},
        over_residue_field=True,
        label=f"{H.label} mod pi" if H.label else "",
    )


def _rank_p_tag(c: BaseElement) -> FiberClass:
    # kernel of y^p - c y over k: alpha_p when c = 0, a form of Z/p otherwise
    return FiberClass("AlphaP") if c.is_zero() else FiberClass("EtaleZp")


def classify_fiber(Hk: HopfPresentation) -> FiberClass:
    if not all(c.degree() <= 0 and c.is_integral() for c in Hk.relation_constants):
        raise HopfError("classify_fiber expects a presentation over the residue field")
    if Hk.counit and any(e for e in Hk.counit.values()):
        return FiberClass("Unknown")
    if len(Hk.generators) == 1 and _is_primitive(Hk, Hk.generators[0]):
        return _rank_p_tag(Hk.relation_constants[0])
    lam = witt_twist(Hk)
    if lam is None:
        if all(_is_primitive(Hk, g) for g in Hk.generators):
            return FiberClass("Product", tuple(_rank_p_tag(c) for c in Hk.relation_constants))
        return FiberClass("Unknown")
    c1, c2 = Hk.relation_constants
    if lam.is_zero():
        return FiberClass("Product", (_rank_p_tag(c1), _rank_p_tag(c2)))
    if c2 == c1 ** Hk.p * lam ** (Hk.p - 1):
        return FiberClass("KernelForm", (lam, c1))
    return FiberClass("Unknown")


def identify_kernel_form(H: HopfPresentation):
    """(lambda, nu) with H == K_{lambda,nu}, or a :class:`NotOfKnownForm`."""
    if H.p == 2:
        raise UnsupportedPrime("kernel identification unsupported for p=2")
    if any(e for e in H.counit.values()):
        return NotOfKnownForm("counit is not zero on the generators")
    lam = witt_twist(H)
    if lam is None:
        return NotOfKnownForm("comultiplication is not a twisted Witt law")
    nu, c2 = H.relation_constants
    if c2 != nu ** H.p * lam ** (H.p - 1):
        return NotOfKnownForm(f"relation constant {c2} != nu^p lambda^(p-1) = "
                              f"{nu ** H.p * lam ** (H.p - 1)}")
    return lam, nu


def presentation_from_cocycle_coefficient(p: int, coeffs: Mapping[int, Scalar], c1: Scalar,
                                          c2: Scalar, names=("u1", "u2")) -> HopfPresentation:
    """Presentation with Delta(g2) = gL2 + gR2 + sum_k coeffs[k] gL1^k gR1^(p-k).

    Used to build presentations that are not a priori of Witt shape.
    """
    ring2 = PolyRing(p, [copy_name(n, t) for t in ("L", "R") for n in names])
    l1, l2, r1, r2 = (ring2.gen(copy_name(names[0], "L")), ring2.gen(copy_name(names[1], "L")),
                      ring2.gen(copy_name(names[0], "R")), ring2.gen(copy_name(names[1], "R")))
    d2 = l2 + r2
    for k, c in coeffs.items():
        d2 = d2 + l1 ** k * r1 ** (p - k) * _b(p, c)
    zero = BaseElement(p)
    return HopfPresentation(p, tuple(names), (_b(p, c1), _b(p, c2)),
                            {names[0]: l1 + r1, names[1]: d2}, {names[0]: zero, names[1]: zero})


__all__ = [
    "HopfPresentation", "FiberClass", "NotOfKnownForm", "HopfError", "UnsupportedPrime",
    "make_zp2", "make_kernel", "witt_presentation", "check_coassoc", "check_counit",
    "check_relations", "check_antipode", "check_all", "antipode", "special_fiber",
    "classify_fiber", "identify_kernel_form", "witt_twist", "copy_name", "cocycle",
    "presentation_from_cocycle_coefficient",
]
