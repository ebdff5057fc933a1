"""Effective models of Z/p^2-actions on a two-parameter family of Artin-Schreier-Witt covers.

Over K = k((pi)) the cover X_K -> A^1 = Spec K[w] is the Z/p^2-torsor

    T1^p - T1 = pi^m1 w
    T2^p - T2 = pi^m2 w - sum_k <p,k> T1^(pk) (-T1)^(p-k)

and Z/p^2 acts by Witt translation.  For the two conductor regimes handled
here a rescaling Z_i = pi^(a_i) T_i gives an R-model X on which G = (Z/p^2)_R
acts.  The effective model is computed as the R-subalgebra of RG generated
by the coefficients of the coaction, and then checked against the
group-scheme axioms, the actions, the special fibre and the invariants.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Mapping, Sequence

from .hopf import (FiberClass, HopfPresentation, NotOfKnownForm, check_all, classify_fiber,
                   copy_name, identify_kernel_form, make_zp2, special_fiber)
from .ring_core import (BaseElement, Check, Lattice, MPoly, PolyRing, RewriteSystem,
                        check_prime, kernel_lattice, lattice_reduce, poly_of, vector_of)
from .witt2 import WittPair, cocycle, w2_add, witt_binom

log = logging.getLogger(__name__)


class UnsupportedRegime(ValueError):
    pass


class VerificationError(RuntimeError):
    """An identity that must hold did not; carries the failing check."""

    def __init__(self, message: str, check: Check | None = None, stage: str = ""):
        super().__init__(message)
        self.check = check
        self.stage = stage


class EffectiveModelError(VerificationError):
    pass


# ---------------------------------------------------------------------------
# Conductors


@dataclass(frozen=True)
class ConductorSpec:
    p: int
    m1: int
    m2: int

    def __post_init__(self):
        check_prime(self.p)
        if self.p == 2:
            # The cover equations write F(T) - T with -(T1, T2) = (-T1, -T2), which is
            # Witt negation only for odd p; at p = 2 the action does not preserve them.
            raise UnsupportedRegime("the cover equations require an odd prime; p = 2 is unsupported")
        if self.regime is None:
            raise UnsupportedRegime(
                f"unsupported regime (m1, m2) = ({self.m1}, {self.m2}) for p = {self.p}; "
                "supported regimes are A: m1 = 0, m2 = -p and "
                "B: m1 = -p^2 n1 < 0, m2 = 0")

    @classmethod
    def regime_a(cls, p: int) -> "ConductorSpec":
        return cls(p, 0, -p)

    @classmethod
    def regime_b(cls, p: int, n1: int) -> "ConductorSpec":
        return cls(p, -p * p * n1, 0)

    @property
    def regime(self) -> str | None:
        p = self.p
        if self.m1 == 0 and self.m2 == -p:
            return "A"
        if self.m1 < 0 and self.m1 % (p * p) == 0 and self.m2 == 0:
            return "B"
        return None

    @property
    def n1(self) -> int | None:
        return -self.m1 // (self.p * self.p) if self.regime == "B" else None

    @property
    def m1_tilde(self) -> int | None:
        n1 = self.n1
        return None if n1 is None else n1 * (self.p * (self.p - 1) + 1)

    @property
    def shifts(self) -> tuple[int, int]:
        """pi-exponents (a1, a2) of the change of variables Z_i = pi^(a_i) T_i."""
        if self.regime == "A":
            return 0, 1
        return self.p * self.n1, self.m1_tilde

    def to_json(self) -> dict:
        return {"p": self.p, "m1": self.m1, "m2": self.m2, "n1": self.n1,
                "m1_tilde": self.m1_tilde}


# ---------------------------------------------------------------------------
# Covers


@dataclass(frozen=True, eq=False)
class CoverPresentation:
    """B-algebra A = B[X1, X2]/(X_i^p - rhs_i) over B = R[w] (or K[w])."""

    p: int
    fiber_vars: tuple[str, str]
    rules: Mapping[str, MPoly]
    side: str = "R"
    base_var: str = "w"

    def __post_init__(self):
        if self.side not in ("R", "K", "k"):
            raise ValueError(f"side must be R, K or k, not {self.side!r}")
        rules = {x: self.rules[x].embed(self.ring) for x in self.fiber_vars}
        object.__setattr__(self, "rules", rules)
        if self.side in ("R", "k") and not all(r.is_integral() for r in rules.values()):
            raise ValueError("an R-model must have integral equations")
        self.rs  # triangularity is checked here

    @cached_property
    def ring(self) -> PolyRing:
        return PolyRing(self.p, (self.base_var,) + tuple(self.fiber_vars))

    @cached_property
    def rs(self) -> RewriteSystem:
        return RewriteSystem(self.ring, self.rules, order=self.fiber_vars)

    def equations(self) -> list[MPoly]:
        """X_i^p - rhs_i as elements of the free polynomial ring."""
        return [self.ring.gen(x) ** self.p - self.rules[x] for x in self.fiber_vars]

    def equation_strings(self) -> list[str]:
        return [f"{x}^{self.p} = {self.rules[x]}" for x in self.fiber_vars]

    def basis_keys(self, max_w_degree: int) -> list[tuple[int, ...]]:
        p = self.p
        return [(c, a, b) for c in range(max_w_degree + 1) for a in range(p) for b in range(p)]

    def mod_pi(self) -> "CoverPresentation":
        if self.side == "K":
            raise ValueError("the generic-fibre cover has no reduction mod pi")
        return CoverPresentation(self.p, self.fiber_vars,
                                 {x: r.mod_pi() for x, r in self.rules.items()}, "k",
                                 self.base_var)


def generic_fibre_cover(p: int, m1: int, m2: int) -> CoverPresentation:
    """The Z/p^2-torsor over K[w] with conductors (m1, m2), variables T1, T2."""
    ring = PolyRing(p, ("w", "T1", "T2"))
    w, t1, t2 = ring.gens()
    r1 = t1 + w.shift_pi(m1)
    r2 = t2 + w.shift_pi(m2) - cocycle(t1 ** p, -t1)
    side = "R" if m1 >= 0 and m2 >= 0 else "K"
    return CoverPresentation(p, ("T1", "T2"), {"T1": r1, "T2": r2}, side)


def model_equations(spec: ConductorSpec) -> CoverPresentation:
    """The R-model of the cover in variables Z1, Z2 for the given regime."""
    p = spec.p
    ring = PolyRing(p, ("w", "Z1", "Z2"))
    w, z1, z2 = ring.gens()
    if spec.regime == "A":
        r1 = z1 + w
        r2 = z2.shift_pi(p - 1) + w - cocycle(z1 ** p, -z1).shift_pi(p)
    else:
        n1, mt = spec.n1, spec.m1_tilde
        r1 = z1.shift_pi((p - 1) * p * n1) + w
        s = ring.zero
        for k in range(1, p):
            s = s + (z1 ** (p * k) * (-z1) ** (p - k)).shift_pi(p * n1 * (p - 1) * (p - 1 - k)) \
                * witt_binom(p, k)
        r2 = z2.shift_pi((p - 1) * mt) + w.shift_pi(p * mt) - s
    return CoverPresentation(p, ("Z1", "Z2"), {"Z1": r1, "Z2": r2}, "R")


# ---------------------------------------------------------------------------
# Coactions


@dataclass(frozen=True, eq=False)
class Coaction:
    """mu^#: A -> A (x) H, given on the fibre generators (w is fixed)."""

    hopf: HopfPresentation
    cover: CoverPresentation
    images: Mapping[str, MPoly]

    def __post_init__(self):
        if self.hopf.p != self.cover.p:
            raise ValueError("characteristic mismatch")
        imgs = {x: self.rs(self.images[x].embed(self.ring)) for x in self.cover.fiber_vars}
        object.__setattr__(self, "images", imgs)

    @property
    def p(self) -> int:
        return self.cover.p

    @cached_property
    def ring(self) -> PolyRing:
        return PolyRing(self.p, self.cover.ring.names + self.hopf.generators)

    @cached_property
    def rs(self) -> RewriteSystem:
        rules = dict(self.cover.rules)
        rules.update(self.hopf.relation_rules(self.ring))
        return RewriteSystem(self.ring, rules, order=self.cover.fiber_vars + self.hopf.generators)

    def image(self, x: MPoly) -> MPoly:
        """mu^#(x) for any x in the cover ring."""
        mapping = {z: self.images[z] for z in self.cover.fiber_vars}
        return self.rs(x.embed(self.cover.ring).subs(mapping, ring=self.ring, reducer=self.rs))

    def images_in(self, tag: str, ring: PolyRing) -> dict[str, MPoly]:
        ren = {g: ring.gen(copy_name(g, tag)) for g in self.hopf.generators}
        ren.update({n: ring.gen(n) for n in self.cover.ring.names})
        return {z: img.subs(ren, ring=ring) for z, img in self.images.items()}

    def mod_pi(self) -> "Coaction":
        return Coaction(special_fiber(self.hopf), self.cover.mod_pi(),
                        {z: img.mod_pi() for z, img in self.images.items()})

    def to_json(self) -> dict:
        return {z: str(self.images[z]) for z in self.cover.fiber_vars}


def verify_coaction(c: Coaction) -> dict[str, Check]:
    H, cov = c.hopf, c.cover
    gens = H.generators
    out: dict[str, Check] = {}

    # (mu (x) id) mu == (id (x) Delta) mu
    r3 = PolyRing(c.p, cov.ring.names + H.names("L", "R"))
    rules = dict(cov.rules)
    rules.update(H.relation_rules(r3, ("L", "R")))
    rs3 = RewriteSystem(r3, rules, order=cov.fiber_vars + H.names("L", "R"))
    mu_l = c.images_in("L", r3)
    mu_r = c.images_in("R", r3)
    delta = H.comul_in("L", "R", r3)
    out["coassoc"] = Check(True, "coaction coassociativity")
    for z in cov.fiber_vars:
        lhs = mu_r[z].subs({y: mu_l[y] for y in cov.fiber_vars}, ring=r3, reducer=rs3)
        rhs = c.images[z].subs({g: delta[g] for g in gens}, ring=r3, reducer=rs3)
        res = rs3(lhs - rhs)
        if res:
            out["coassoc"] = Check(False, "coaction coassociativity", res, z)
            break

    # (id (x) eps) mu == id
    out["counit"] = Check(True, "coaction counit")
    for z in cov.fiber_vars:
        res = cov.rs(c.images[z].subs(dict(H.counit), ring=cov.ring) - cov.ring.gen(z))
        if res:
            out["counit"] = Check(False, "coaction counit", res, z)
            break

    # mu respects the cover equations
    out["relations"] = Check(True, "coaction preserves relations")
    mapping = {z: c.images[z] for z in cov.fiber_vars}
    for z in cov.fiber_vars:
        lhs = c.rs.pow(c.images[z], c.p)
        rhs = cov.rules[z].subs(mapping, ring=c.ring, reducer=c.rs)
        res = c.rs(lhs - rhs)
        if res:
            out["relations"] = Check(False, "coaction preserves relations", res, z)
            break

    if cov.side == "R":
        bad = [z for z, img in c.images.items() if not img.is_integral()]
        out["integral"] = Check(not bad, "integral images", None, ",".join(bad))
    return out


def require(checks: Mapping[str, Check], stage: str) -> None:
    for chk in checks.values():
        if not chk:
            raise VerificationError(f"{stage}: {chk.describe()}", chk, stage)


def witt_translation(hopf: HopfPresentation, cover: CoverPresentation,
                     shifts: tuple[int, int] = (0, 0)) -> Coaction:
    """Coaction induced by X -> X + g on T_i = pi^(-a_i) Z_i.

    Z1 -> Z1 + pi^a1 g1,
    Z2 -> Z2 + pi^a2 g2 + sum_k <p,k> pi^(a2 - a1 k) Z1^k g1^(p-k).
    """
    p = cover.p
    a1, a2 = shifts
    ring = PolyRing(p, cover.ring.names + hopf.generators)
    x1, x2 = (ring.gen(x) for x in cover.fiber_vars)
    g1, g2 = (ring.gen(g) for g in hopf.generators)
    img2 = x2 + g2.shift_pi(a2)
    for k in range(1, p):
        img2 = img2 + (x1 ** k * g1 ** (p - k)).shift_pi(a2 - a1 * k) * witt_binom(p, k)
    return Coaction(hopf, cover, {cover.fiber_vars[0]: x1 + g1.shift_pi(a1),
                                  cover.fiber_vars[1]: img2})


def trivial_coaction(hopf: HopfPresentation, cover: CoverPresentation) -> Coaction:
    ring = PolyRing(cover.p, cover.ring.names + hopf.generators)
    return Coaction(hopf, cover, {z: ring.gen(z) for z in cover.fiber_vars})


# ---------------------------------------------------------------------------
# Building the R-model


@dataclass(frozen=True, eq=False)
class CoverModel:
    spec: ConductorSpec
    k_side: CoverPresentation
    change_of_variables: dict[str, int]
    model: CoverPresentation
    coaction: Coaction
    checks: dict[str, Check] = field(default_factory=dict)

    def change_strings(self) -> list[str]:
        ring = PolyRing(self.spec.p, ("T1", "T2"))
        return [f"{z} = {ring.gen(t).shift_pi(a)}"
                for (z, a), t in zip(self.change_of_variables.items(), ("T1", "T2"))]


def check_change_of_variables(k_side: CoverPresentation, model: CoverPresentation,
                              shifts: Sequence[int]) -> Check:
    """Substituting Z_i = pi^(a_i) T_i into model equation i gives
    pi^(p a_i) times K-side equation i, as polynomials."""
    p = model.p
    free = k_side.ring
    sub = {z: free.gen(t).shift_pi(a)
           for z, t, a in zip(model.fiber_vars, k_side.fiber_vars, shifts)}
    sub[model.base_var] = free.gen(k_side.base_var)
    for eq_m, eq_k, a, z in zip(model.equations(), k_side.equations(), shifts, model.fiber_vars):
        res = eq_m.subs(sub, ring=free) - eq_k.shift_pi(p * a)
        if res:
            return Check(False, "change of variables", res, z)
    return Check(True, "change of variables")


def check_standard_action(c: Coaction, k_side: CoverPresentation, shifts: Sequence[int]) -> Check:
    """On T_i = pi^(-a_i) Z_i the coaction is the Witt translation T -> T + u."""
    H = c.hopf
    ring = PolyRing(c.p, k_side.ring.names + H.generators)
    sub = {z: ring.gen(t).shift_pi(a)
           for z, t, a in zip(c.cover.fiber_vars, k_side.fiber_vars, shifts)}
    sub[c.cover.base_var] = ring.gen(k_side.base_var)
    t = WittPair(*(ring.gen(x) for x in k_side.fiber_vars))
    u = WittPair(*(ring.gen(g) for g in H.generators))
    target = w2_add(1, t, u)
    for z, a, tgt in zip(c.cover.fiber_vars, shifts, target):
        res = c.images[z].subs(sub, ring=ring) - tgt.shift_pi(a)
        if res:
            return Check(False, "standard Witt action", res, z)
    return Check(True, "standard Witt action")


def build_cover(spec: ConductorSpec) -> CoverModel:
    """K-side torsor, change of variables, R-model and the action of (Z/p^2)_R."""
    p = spec.p
    k_side = generic_fibre_cover(p, spec.m1, spec.m2)
    shifts = spec.shifts
    model = model_equations(spec)
    G = make_zp2(p)
    c = witt_translation(G, model, shifts)
    checks = {
        "change_of_variables": check_change_of_variables(k_side, model, shifts),
        "standard_action": check_standard_action(c, k_side, shifts),
    }
    checks.update(verify_coaction(c))
    require(checks, "build_cover")
    change = dict(zip(model.fiber_vars, shifts))
    return CoverModel(spec, k_side, change, model, c, checks)


# ---------------------------------------------------------------------------
# Effective model


def coaction_coefficients(c: Coaction, generator: str | None = None) -> list[MPoly]:
    """Non-scalar coefficients of mu^#(Z) on the cover's monomial basis, in H."""
    out: list[MPoly] = []
    seen = set()
    names = c.cover.ring.names
    for z in ([generator] if generator else c.cover.fiber_vars):
        parts = c.images[z].split(names)
        for mono in sorted(parts, reverse=True):
            coeff = parts[mono].embed(c.hopf.ring)
            if coeff.is_constant():
                continue
            # unit multiples span the same lattice; keep a monic representative
            coeff = coeff * pow(coeff.sorted_terms()[0][1], -1, c.p)
            if coeff in seen:
                continue
            seen.add(coeff)
            out.append(coeff)
    return out


@dataclass(frozen=True, eq=False)
class EffectiveModel:
    """A sub-Hopf-algebra R[v] of H generated by v_i = pi^(e_i) g_i."""

    group: HopfPresentation
    domination: dict[str, MPoly]
    ambient: HopfPresentation
    exponents: tuple[int, ...]
    lattice: Lattice

    def __iter__(self):
        return iter((self.group, self.domination))

    def domination_json(self) -> list[dict]:
        return [{"generator": g, "image": str(self.domination[g])} for g in self.group.generators]


def _saturate(H: HopfPresentation, elements: Sequence[MPoly]) -> Lattice:
    keys = H.basis_keys()
    rs = H.rs

    def vec(x):
        return vector_of(rs(x), keys)

    L = lattice_reduce([vec(H.ring.one)] + [vec(g) for g in elements], basis=keys, p=H.p)
    cap = H.rank
    for rounds in range(1, cap + 1):
        grew = False
        for row in list(L.rows):
            x = poly_of(row, keys, H.ring)
            for g in elements:
                y = vec(rs.mul(x, g))
                if not L.contains(y):
                    L = L.add(y)
                    grew = True
        if not grew:
            log.debug("saturation stable after %d rounds, rank %d", rounds, L.rank)
            return L
    raise EffectiveModelError(f"lattice saturation did not stabilize within {cap} rounds")


def coefficient_subalgebra(H: HopfPresentation, elements: Sequence[MPoly],
                           stem: str = "v") -> EffectiveModel:
    """R-subalgebra of H generated by ``elements``, presented as R[v].

    The canonical generators are v_i = pi^(e_i) g_i with e_i minimal such
    that pi^(e_i) g_i lies in the subalgebra.  Raises when the subalgebra is
    not of that shape or does not inherit a comultiplication.
    """
    p = H.p
    elements = [H.rs(e.embed(H.ring)) for e in elements]
    L = _saturate(H, elements)
    keys = H.basis_keys()
    exps = []
    for g in H.generators:
        e = L.min_scaling(vector_of(H.ring.gen(g), keys))
        if e is None:
            raise EffectiveModelError(
                f"no multiple of {g} lies in the coefficient subalgebra: "
                "the action is not faithful on the generic fibre")
        exps.append(e)
    mono_rows = []
    for k in keys:
        shift = sum(a * e for a, e in zip(k, exps))
        mono_rows.append(vector_of(H.ring.monomial(dict(zip(H.generators, k)), pi=shift), keys))
    if not lattice_reduce(mono_rows, basis=keys, p=p) == L:
        raise EffectiveModelError("coefficient subalgebra is not generated by rescaled coordinates")

    new = tuple(stem + g[len(_stem(g)):] for g in H.generators)
    consts = tuple(c.shift((p - 1) * e) for c, e in zip(H.relation_constants, exps))
    tmp = HopfPresentation(p, new, consts, {n: PolyRing(p, ()).zero for n in new},
                           {n: BaseElement(p) for n in new})
    r2 = tmp.ring2
    sub = {}
    for g, n, e in zip(H.generators, new, exps):
        for t in ("L", "R"):
            sub[copy_name(g, t)] = r2.gen(copy_name(n, t)).shift_pi(-e)
    comul = {}
    for g, n, e in zip(H.generators, new, exps):
        d = H.comul[g].subs(sub, ring=r2).shift_pi(e)
        if not d.is_integral():
            raise EffectiveModelError(
                f"coefficient subalgebra is not a sub-Hopf-algebra: Delta({n}) = {d}",
                Check(False, "integral comultiplication", d, n))
        comul[n] = d
    counit = {n: H.counit[g].shift(e) for g, n, e in zip(H.generators, new, exps)}
    G_eff = HopfPresentation(p, new, consts, comul, counit, label="effective model")
    require(check_all(G_eff), "effective_model")
    dom = {n: H.ring.gen(g).shift_pi(e) for g, n, e in zip(H.generators, new, exps)}
    return EffectiveModel(G_eff, dom, H, tuple(exps), L)


def _stem(name: str) -> str:
    i = len(name)
    while i and name[i - 1].isdigit():
        i -= 1
    return name[:i]


def effective_model(c: Coaction) -> EffectiveModel:
    """Effective model of the action: the subalgebra of RG generated by the
    coaction coefficients, with its inherited Hopf structure."""
    if c.hopf.rank != c.p ** 2:
        raise EffectiveModelError("the acting group must have rank p^2")
    require(verify_coaction(c), "effective_model")
    return coefficient_subalgebra(c.hopf, coaction_coefficients(c))


def induced_coaction(c: Coaction, model: EffectiveModel) -> Coaction:
    """The action of the effective model: rewrite mu^# in the generators v."""
    G_eff = model.group
    ring = PolyRing(c.p, c.cover.ring.names + G_eff.generators)
    sub = {g: ring.gen(n).shift_pi(-e)
           for g, n, e in zip(c.hopf.generators, G_eff.generators, model.exponents)}
    images = {}
    for z, img in c.images.items():
        new = img.subs(sub, ring=ring)
        if not new.is_integral():
            raise EffectiveModelError(f"induced action of {z} is not integral: {new}")
        images[z] = new
    out = Coaction(G_eff, c.cover, images)
    require(verify_coaction(out), "induced_coaction")
    return out


def check_domination(c: Coaction, c_eff: Coaction, domination: Mapping[str, MPoly]) -> Check:
    """mu_G == (id (x) domination) o mu_eff on every fibre generator."""
    sub = {n: domination[n].embed(c.ring) for n in c_eff.hopf.generators}
    for z in c.cover.fiber_vars:
        res = c.rs(c_eff.images[z].subs(sub, ring=c.ring, reducer=c.rs) - c.images[z])
        if res:
            return Check(False, "domination", res, z)
    return Check(True, "domination")


# ---------------------------------------------------------------------------
# Special-fibre diagnostics


def _rank_over_domain(rows: list[list[MPoly]], rs: RewriteSystem) -> int:
    """Rank over Frac(D) by fraction-free elimination, D = quotient by ``rs``.

    Requires D to be a domain (true for the reduced, irreducible special
    fibres of both regimes), so nonzero pivots are not zero divisors.
    """
    rows = [list(r) for r in rows if any(x for x in r)]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        prow = rows[rank]
        a = prow[col]
        for i in range(rank + 1, len(rows)):
            b = rows[i][col]
            if b:
                rows[i] = [rs(a * x - b * y) for x, y in zip(rows[i], prow)]
        rank += 1
        if rank == len(rows):
            break
    return rank


@dataclass(frozen=True)
class Stabilizer:
    ideal: tuple[MPoly, ...]
    order: int

    def to_json(self) -> dict:
        return {"ideal": [str(g) for g in self.ideal], "order": self.order}


def stabilizer(ck: Coaction) -> Stabilizer:
    """Stabilizer of the generic point of the special fibre.

    ``ck`` is a coaction over k.  Adjoin a generic point (w, z1, z2) subject
    to the special-fibre equations, impose g.(z) = z, and return the ideal
    together with the rank of the quotient of H_k (x) k(X_k).
    """
    H, cov = ck.hopf, ck.cover
    low = {n: n.lower() for n in cov.ring.names}
    ring = PolyRing(ck.p, H.generators + tuple(low[n] for n in cov.ring.names))
    rules = {low[z]: cov.rules[z].subs({n: ring.gen(low[n]) for n in cov.ring.names}, ring=ring)
             for z in cov.fiber_vars}
    rules.update(H.relation_rules(ring))
    rs = RewriteSystem(ring, rules, order=tuple(low[z] for z in cov.fiber_vars) + H.generators)
    ren = {n: ring.gen(low[n]) for n in cov.ring.names}
    ren.update({g: ring.gen(g) for g in H.generators})
    eqs = []
    for z in cov.fiber_vars:
        e = rs(ck.images[z].subs(ren, ring=ring) - ring.gen(low[z]))
        if e:
            eqs.append(e)
    basis = [ring.monomial(dict(zip(H.generators, k))) for k in H.basis_keys()]
    keys = H.basis_keys()
    rows = []
    for g in eqs:
        for m in basis:
            parts = rs(m * g).split(H.generators)
            rows.append([parts.get(k, ring.zero) for k in keys])
    rank = _rank_over_domain(rows, rs)
    return Stabilizer(tuple(eqs), H.rank - rank)


def faithfulness_check(ck: Coaction) -> Check:
    """The ideal generated by {c - eps(c)} over the coaction coefficients of
    the special fibre equals the augmentation ideal of H_k."""
    H = ck.hopf
    coeffs = coaction_coefficients(ck)
    gens = [x - H.ring.const(H.counit_of(x)) for x in coeffs]
    keys = H.basis_keys()
    rows = []
    for g in gens:
        for k in keys:
            parts = H.rs(H.ring.monomial(dict(zip(H.generators, k))) * g).split(H.generators)
            rows.append([parts.get(k2, H.ring.zero) for k2 in keys])
    rank = _rank_over_domain(rows, H.rs)
    ok = rank == H.rank - 1
    return Check(ok, "faithful on special fibre", None if ok else f"ideal rank {rank}, "
                 f"augmentation ideal rank {H.rank - 1}")


class Verdict(str, Enum):
    TORSOR = "Torsor"
    FAITHFUL_NOT_FREE = "FaithfulNotFree"
    NOT_FAITHFUL = "NotFaithful"

    def __str__(self):
        return self.value


def torsor_verdict(faithful: bool, stabilizer_order: int) -> Verdict:
    if not faithful:
        return Verdict.NOT_FAITHFUL
    return Verdict.TORSOR if stabilizer_order == 1 else Verdict.FAITHFUL_NOT_FREE


# ---------------------------------------------------------------------------
# Invariants and subgroups


def invariant_lattice(c: Coaction, max_w_degree: int) -> tuple[Lattice, list[tuple[int, ...]]]:
    """Kernel of mu^# - (x -> x (x) 1) on {w^c Z1^a Z2^b : a, b < p, c <= d}."""
    keys = c.cover.basis_keys(max_w_degree)
    names = c.cover.ring.names
    diffs = []
    for k in keys:
        m = c.cover.ring.monomial(dict(zip(names, k)))
        diffs.append(c.image(m) - m.embed(c.ring))
    target = sorted({t for d in diffs for t in d.base_coefficients()})
    images = [vector_of(d, target) if target else [] for d in diffs]
    if not target:
        n = len(keys)
        one, zero = BaseElement.const(c.p, 1), BaseElement(c.p)
        rows = [[one if i == j else zero for j in range(n)] for i in range(n)]
        return Lattice(keys, rows, range(n), c.p), keys
    return kernel_lattice(images, basis=keys), keys


def invariants_check(c: Coaction, c_eff: Coaction, max_w_degree: int) -> Check:
    """A^G == A^(effective model) on the truncated basis, both containing R[w]."""
    L1, keys = invariant_lattice(c, max_w_degree)
    L2, _ = invariant_lattice(c_eff, max_w_degree)
    if not L1 == L2:
        return Check(False, "invariants", (L1, L2))
    one, zero = BaseElement.const(c.p, 1), BaseElement(c.p)
    for i, k in enumerate(keys):
        if k[1] == 0 and k[2] == 0:
            v = [zero] * len(keys)
            v[i] = one
            if not (L1.contains(v) and L2.contains(v)):
                return Check(False, "invariants", f"w^{k[0]} not invariant")
    return Check(True, "invariants")


def quotient_presentation(H: HopfPresentation, killed: Sequence[str]) -> HopfPresentation:
    """H/(killed generators) with the induced structure."""
    keep = tuple(g for g in H.generators if g not in killed)
    r2 = PolyRing(H.p, tuple(copy_name(g, t) for t in ("L", "R") for g in keep))
    zero = {copy_name(g, t): 0 for g in killed for t in ("L", "R")}
    comul = {g: H.comul[g].subs(zero, ring=r2) for g in keep}
    Q = HopfPresentation(H.p, keep,
                         tuple(c for g, c in zip(H.generators, H.relation_constants) if g in keep),
                         comul, {g: H.counit[g] for g in keep}, label=f"{H.label}/({','.join(killed)})")
    require(check_all(Q), "quotient_presentation")
    return Q


@dataclass(frozen=True, eq=False)
class SubgroupModel:
    group: HopfPresentation
    domination: dict[str, MPoly]
    connected: bool


def subgroup_effective_model(model: EffectiveModel, killed: Sequence[str] = ("u1",)) -> SubgroupModel:
    """Schematic image of the subgroup H = V(killed) of G in the effective model.

    The default kills u1, i.e. H = pZ/p^2.  The image is the subalgebra of RH
    generated by the domination images restricted to H.
    """
    G = model.ambient
    Q = quotient_presentation(G, killed) if killed else G
    zero = {g: 0 for g in killed}
    imgs = [model.domination[n].subs(zero, ring=G.ring) for n in model.group.generators]
    imgs = [x.embed(Q.ring) for x in imgs if not x.is_constant()]
    sub = coefficient_subalgebra(Q, imgs)
    connected = all(c.valuation() > 0 for c in sub.group.relation_constants)
    return SubgroupModel(sub.group, sub.domination, connected)


# ---------------------------------------------------------------------------
# Orchestration


@dataclass(frozen=True, eq=False)
class DegenerationReport:
    spec: ConductorSpec
    change_of_variables: list[str]
    model_equations: list[str]
    effective_model: HopfPresentation
    identified: tuple | None
    domination: list[dict]
    fiber_class: FiberClass
    stabilizer: Stabilizer
    verdict: Verdict
    faithful: bool
    invariants_ok: bool
    checks: dict[str, bool]

    def to_json(self) -> dict:
        em = self.effective_model
        return {
            "spec": self.spec.to_json(),
            "change_of_variables": list(self.change_of_variables),
            "model_equations": list(self.model_equations),
            "effective_model": {
                "generators": list(em.generators),
                "relation_constants": [str(c) for c in em.relation_constants],
                "comul": {g: str(em.comul[g]) for g in em.generators},
            },
            "identified": None if self.identified is None else
            {"lambda": str(self.identified[0]), "nu": str(self.identified[1])},
            "domination": self.domination,
            "fiber_class": str(self.fiber_class),
            "stabilizer": self.stabilizer.to_json(),
            "verdict": str(self.verdict),
            "faithful": self.faithful,
            "invariants_ok": self.invariants_ok,
            "checks": dict(self.checks),
        }


class DegenerationError(VerificationError):
    pass


INVARIANTS_DEGREE = 3


def degenerate(spec: ConductorSpec) -> DegenerationReport:
    stage = "build_cover"
    try:
        cm = build_cover(spec)
        stage = "effective_model"
        model = effective_model(cm.coaction)
        c_eff = induced_coaction(cm.coaction, model)
        dom_ok = check_domination(cm.coaction, c_eff, model.domination)
        if not dom_ok:
            raise VerificationError(dom_ok.describe(), dom_ok)
        stage = "identify_kernel_form"
        identified = None
        if spec.p > 2:
            ident = identify_kernel_form(model.group)
            if isinstance(ident, NotOfKnownForm):
                raise VerificationError(f"effective model not recognized: {ident.reason}")
            identified = ident
        stage = "special_fiber"
        ck = c_eff.mod_pi()
        fiber = classify_fiber(ck.hopf)
        stage = "stabilizer"
        stab = stabilizer(ck)
        stage = "faithfulness"
        faithful = bool(faithfulness_check(ck))
        stage = "invariants"
        inv = invariants_check(cm.coaction, c_eff, INVARIANTS_DEGREE)
        stage = "subgroup"
        sub = subgroup_effective_model(model)
    except UnsupportedRegime:
        raise
    except VerificationError as exc:
        raise DegenerationError(f"{stage}: {exc}", exc.check, stage) from exc
    verdict = torsor_verdict(faithful, stab.order)
    checks = {"domination": bool(dom_ok), "subgroup_connected": sub.connected}
    checks.update({f"cover_{k}": bool(v) for k, v in cm.checks.items()})
    return DegenerationReport(
        spec=spec,
        change_of_variables=cm.change_strings(),
        model_equations=cm.model.equation_strings(),
        effective_model=model.group,
        identified=identified,
        domination=model.domination_json(),
        fiber_class=fiber,
        stabilizer=stab,
        verdict=verdict,
        faithful=faithful,
        invariants_ok=bool(inv),
        checks=checks,
    )
