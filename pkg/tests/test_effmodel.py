from functools import lru_cache

import pytest

from wittdegen import effmodel
from wittdegen.effmodel import (ConductorSpec, Coaction, DegenerationError, EffectiveModelError,
                                UnsupportedRegime, Verdict, build_cover, check_change_of_variables,
                                check_domination, coaction_coefficients, coefficient_subalgebra,
                                degenerate, effective_model, faithfulness_check, induced_coaction,
                                invariant_lattice, invariants_check, model_equations,
                                generic_fibre_cover, stabilizer, subgroup_effective_model,
                                torsor_verdict, trivial_coaction, verify_coaction,
                                witt_translation)
from wittdegen.hopf import NotOfKnownForm, check_all, make_zp2
from wittdegen.ring_core import BaseElement, PolyRing, lattice_reduce, vector_of
from wittdegen.witt2 import WittPair, phi, witt_binom

SWEEP = [(p, r, n1) for p in (3, 5, 7) for r, n1 in (("A", None), ("B", 1), ("B", 2))]


def pi(p, e=1):
    return BaseElement.pi_power(p, e)


def spec_of(p, regime, n1=None):
    return ConductorSpec.regime_a(p) if regime == "A" else ConductorSpec.regime_b(p, n1)


@lru_cache(maxsize=None)
def pipeline(p, regime, n1=None):
    cm = build_cover(spec_of(p, regime, n1))
    model = effective_model(cm.coaction)
    c_eff = induced_coaction(cm.coaction, model)
    return cm, model, c_eff


@lru_cache(maxsize=None)
def report(p, regime, n1=None):
    return degenerate(spec_of(p, regime, n1))


# -- conductors ---------------------------------------------------------------


def test_regime_detection():
    a = ConductorSpec(3, 0, -3)
    assert a.regime == "A" and a.n1 is None and a.shifts == (0, 1)
    b = ConductorSpec(3, -9, 0)
    assert b.regime == "B" and b.n1 == 1 and b.m1_tilde == 7 and b.shifts == (3, 7)
    assert ConductorSpec(5, -50, 0).m1_tilde == 2 * 21


@pytest.mark.parametrize("m1,m2", [(0, 0), (-3, 0), (1, -3), (-9, -3), (0, -2)])
def test_unsupported_regimes_name_both_regimes(m1, m2):
    with pytest.raises(UnsupportedRegime) as exc:
        ConductorSpec(3, m1, m2)
    assert "A: m1 = 0, m2 = -p" in str(exc.value) and "B: m1 = -p^2 n1" in str(exc.value)


def test_p2_is_refused():
    with pytest.raises(UnsupportedRegime):
        ConductorSpec(2, 0, -2)


def test_p2_cover_equations_are_not_preserved_by_witt_translation():
    # the equations use coordinatewise negation, which is not Witt negation at p = 2
    checks = verify_coaction(witt_translation(make_zp2(2), generic_fibre_cover(2, 0, -2)))
    assert not checks["relations"]
    checks = verify_coaction(witt_translation(make_zp2(3), generic_fibre_cover(3, 0, -3)))
    assert all(checks.values())


# -- build_cover ----------------------------------------------------------------


def test_regime_a_model_p3():
    model = model_equations(ConductorSpec(3, 0, -3))
    r = model.ring
    w, z1, z2 = r.gens()
    assert model.rules["Z1"] == z1 + w
    assert model.rules["Z2"] == z2 * pi(3, 2) + w - (z1 ** 5 - z1 ** 7) * pi(3, 3)


def test_regime_b_change_of_variables_p3():
    cm = build_cover(ConductorSpec(3, -9, 0))
    assert cm.change_of_variables == {"Z1": 3, "Z2": 7}
    assert cm.change_strings() == ["Z1 = pi^3*T1", "Z2 = pi^7*T2"]
    r = cm.coaction.ring
    assert cm.coaction.images["Z1"] == r.gen("Z1") + r.gen("u1") * pi(3, 3)


@pytest.mark.parametrize("p,regime,n1", SWEEP)
def test_build_cover_verifies(p, regime, n1):
    cm, _, _ = pipeline(p, regime, n1)
    assert cm.checks and all(cm.checks.values())
    assert cm.k_side.side == "K" and cm.model.side == "R"


def test_wrong_change_of_variables_is_detected():
    spec = ConductorSpec(3, -9, 0)
    k_side = generic_fibre_cover(3, spec.m1, spec.m2)
    model = model_equations(spec)
    assert check_change_of_variables(k_side, model, (3, 7))
    assert not check_change_of_variables(k_side, model, (3, 6))
    assert not check_change_of_variables(k_side, model, (2, 7))


def test_regime_a_model_is_phi_of_z():
    for p in (3, 5, 7):
        model = model_equations(ConductorSpec.regime_a(p))
        w, z1, z2 = model.ring.gens()
        out = phi(pi(p), 1, WittPair(z1, z2))
        eq1, eq2 = model.equations()
        assert eq1 == out.first - w
        assert eq2 == out.second - w


# -- coefficients and effective model ---------------------------------------------


@pytest.mark.parametrize("p", [3, 5])
@pytest.mark.parametrize("n1", [1, 2])
def test_coaction_coefficients_regime_b(p, n1):
    cm, _, _ = pipeline(p, "B", n1)
    c = cm.coaction
    u1, u2 = c.hopf.ring.gens()
    mt = n1 * (p * (p - 1) + 1)
    assert coaction_coefficients(c, "Z1") == [u1.shift_pi(p * n1)]
    got = coaction_coefficients(c, "Z2")
    expected = {u2.shift_pi(mt)} | {(u1 ** (p - k)).shift_pi(n1 * (p * (p - 1) + 1 - p * k))
                                    for k in range(1, p)}
    assert set(got) == expected and len(got) == len(expected)
    assert u1.shift_pi(n1) in got


def test_trivial_coaction_has_no_coefficients():
    c = trivial_coaction(make_zp2(3), generic_fibre_cover(3, 0, 0))
    assert coaction_coefficients(c) == []


def test_effective_model_regime_a_p3():
    _, model, _ = pipeline(3, "A")
    assert {k: str(v) for k, v in model.domination.items()} == {"v1": "u1", "v2": "pi*u2"}
    assert model.group.relation_constants == (1, pi(3, 2))


def test_effective_model_regime_b_p3():
    _, model, _ = pipeline(3, "B", 1)
    assert {k: str(v) for k, v in model.domination.items()} == {"v1": "pi*u1", "v2": "pi^7*u2"}
    g, _ = model
    d2 = g.comul["v2"]
    assert d2.coefficient({"vL1": 2, "vR1": 1}) == pi(3, 4)
    assert d2.coefficient({"vL1": 1, "vR1": 2}) == pi(3, 4)


def test_trivial_degeneration_gives_the_group_itself():
    G = make_zp2(3)
    c = witt_translation(G, generic_fibre_cover(3, 0, 0))
    model = effective_model(c)
    assert model.exponents == (0, 0)
    assert model.group.relation_constants == G.relation_constants
    assert [str(model.group.comul[v]) for v in ("v1", "v2")] == \
        [str(G.comul[u]).replace("u", "v") for u in ("u1", "u2")]
    c_eff = induced_coaction(c, model)
    assert check_domination(c, c_eff, model.domination)


def test_unfaithful_action_is_rejected():
    c = trivial_coaction(make_zp2(3), generic_fibre_cover(3, 0, 0))
    with pytest.raises(EffectiveModelError, match="not faithful on the generic fibre"):
        effective_model(c)


def test_non_hopf_subalgebra_is_rejected():
    G = make_zp2(3)
    u1, u2 = G.ring.gens()
    with pytest.raises(EffectiveModelError, match="not a sub-Hopf-algebra") as exc:
        coefficient_subalgebra(G, [u1.shift_pi(1), u2])
    assert exc.value.check is not None and exc.value.check.residual is not None


@pytest.mark.parametrize("p,regime,n1", SWEEP)
def test_effective_model_properties(p, regime, n1):
    cm, model, c_eff = pipeline(p, regime, n1)
    assert all(check_all(model.group).values())
    lam, nu = effmodel.identify_kernel_form(model.group)
    if regime == "A":
        assert (lam, nu) == (pi(p), 1)
    else:
        assert (lam, nu) == (pi(p, n1 * (p - 1) ** 2), pi(p, n1 * (p - 1)))
    assert check_domination(cm.coaction, c_eff, model.domination)
    assert all(img.is_integral() for img in c_eff.images.values())
    assert all(verify_coaction(c_eff).values())


@pytest.mark.parametrize("p,n1", [(3, 1), (5, 1), (3, 2)])
def test_coefficient_lattice_is_strictly_smaller_in_regime_b(p, n1):
    _, model, _ = pipeline(p, "B", n1)
    G = model.ambient
    keys = G.basis_keys()
    full = lattice_reduce([vector_of(m, keys) for m in G.rs.basis()], basis=keys, p=p)
    assert model.lattice <= full and not full <= model.lattice


@pytest.mark.parametrize("p,n1", [(3, 1), (5, 2)])
def test_induced_action_display(p, n1):
    # Z1 -> Z1 + pi^((p-1) n1) v1,
    # Z2 -> Z2 + v2 + sum <p,k> pi^(n1 (p-1)(p-1-k)) Z1^k v1^(p-k)
    _, _, c_eff = pipeline(p, "B", n1)
    r = c_eff.ring
    z1, z2, v1, v2 = (r.gen(n) for n in ("Z1", "Z2", "v1", "v2"))
    assert c_eff.images["Z1"] == z1 + v1.shift_pi((p - 1) * n1)
    img2 = z2 + v2
    for k in range(1, p):
        img2 = img2 + (z1 ** k * v1 ** (p - k)).shift_pi(n1 * (p - 1) * (p - 1 - k)) * witt_binom(p, k)
    assert c_eff.images["Z2"] == img2


# -- domination --------------------------------------------------------------


@pytest.mark.parametrize("gen", ["v1", "v2"])
@pytest.mark.parametrize("delta", [1, -1])
def test_perturbed_domination_is_detected(gen, delta):
    cm, model, c_eff = pipeline(3, "B", 1)
    bad = dict(model.domination)
    bad[gen] = bad[gen].shift_pi(delta)
    chk = check_domination(cm.coaction, c_eff, bad)
    assert not chk and chk.residual is not None


# -- special fibre -------------------------------------------------------------


@pytest.mark.parametrize("p,n1", [(3, 1), (5, 1), (3, 2), (7, 1)])
def test_stabilizer_regime_b(p, n1):
    _, _, c_eff = pipeline(p, "B", n1)
    st = stabilizer(c_eff.mod_pi())
    assert [str(g) for g in st.ideal] == [f"v1*z1^{p - 1} + v2"]
    assert st.order == p


@pytest.mark.parametrize("p", [3, 5])
def test_stabilizer_regime_a(p):
    _, _, c_eff = pipeline(p, "A")
    st = stabilizer(c_eff.mod_pi())
    assert st.order == 1
    assert [str(g) for g in st.ideal] == ["v1", "v2"]


def test_stabilizer_of_trivial_action_is_everything():
    c = trivial_coaction(make_zp2(3), generic_fibre_cover(3, 0, 0))
    st = stabilizer(c.mod_pi())
    assert st.order == 9 and st.ideal == ()


def test_faithfulness_and_verdicts():
    _, _, ca = pipeline(3, "A")
    cmb, _, cb = pipeline(3, "B", 1)
    fa, fb = faithfulness_check(ca.mod_pi()), faithfulness_check(cb.mod_pi())
    assert fa and fb
    assert torsor_verdict(bool(fa), stabilizer(ca.mod_pi()).order) == Verdict.TORSOR
    assert torsor_verdict(bool(fb), stabilizer(cb.mod_pi()).order) == Verdict.FAITHFUL_NOT_FREE
    g_on_special = faithfulness_check(cmb.coaction.mod_pi())
    assert not g_on_special
    assert torsor_verdict(bool(g_on_special), 1) == Verdict.NOT_FAITHFUL


# -- invariants and subgroups ---------------------------------------------------


@pytest.mark.parametrize("d", [1, 2, 3])
def test_invariants_regime_b(d):
    cm, _, c_eff = pipeline(3, "B", 1)
    assert invariants_check(cm.coaction, c_eff, d)
    L, keys = invariant_lattice(cm.coaction, d)
    w_powers = [[BaseElement.const(3, int(k == (c, 0, 0))) for k in keys] for c in range(d + 1)]
    assert L == lattice_reduce(w_powers, basis=keys, p=3)


def test_invariants_of_trivial_action():
    c = trivial_coaction(make_zp2(3), generic_fibre_cover(3, 0, 0))
    L, keys = invariant_lattice(c, 2)
    assert L.rank == len(keys)


def test_mutated_effective_action_breaks_invariants():
    cm, _, c_eff = pipeline(3, "B", 1)
    images = dict(c_eff.images)
    images["Z1"] = c_eff.ring.gen("Z1")
    mutated = Coaction(c_eff.hopf, c_eff.cover, images)
    assert not invariants_check(cm.coaction, mutated, 2)


def test_subgroup_model_regime_a():
    _, model, _ = pipeline(3, "A")
    sub = subgroup_effective_model(model)
    assert sub.group.generators == ("v2",)
    assert sub.group.relation_constants == (pi(3, 2),)
    assert str(sub.domination["v2"]) == "pi*u2"
    assert sub.connected


@pytest.mark.parametrize("p,n1", [(3, 1), (5, 2)])
def test_subgroup_model_regime_b(p, n1):
    _, model, _ = pipeline(p, "B", n1)
    sub = subgroup_effective_model(model)
    assert str(sub.domination["v2"]) == f"pi^{n1 * (p * (p - 1) + 1)}*u2"
    assert sub.connected


def test_subgroup_model_of_full_group_is_the_effective_model():
    _, model, _ = pipeline(3, "B", 1)
    sub = subgroup_effective_model(model, killed=())
    assert sub.group.relation_constants == model.group.relation_constants
    assert sub.group.comul == model.group.comul


# -- orchestration ---------------------------------------------------------------


def test_degenerate_example_1():
    r = report(3, "A")
    assert r.identified == (pi(3), 1)
    assert r.verdict == Verdict.TORSOR


def test_degenerate_example_2():
    r = report(3, "B", 1)
    assert r.identified == (pi(3, 4), pi(3, 2))
    assert str(r.fiber_class) == "Product(AlphaP, AlphaP)"
    assert r.stabilizer.order == 3
    assert r.verdict == Verdict.FAITHFUL_NOT_FREE


@pytest.mark.parametrize("p,regime,n1", SWEEP)
def test_report_invariants(p, regime, n1):
    r = report(p, regime, n1)
    data = r.to_json()
    assert (p * p) % r.stabilizer.order == 0
    assert (r.stabilizer.order == 1) == (r.verdict == Verdict.TORSOR)
    assert r.faithful and r.invariants_ok
    assert all(data["checks"].values())
    if regime == "A":
        assert data["fiber_class"] == "Product(EtaleZp, AlphaP)"


def test_degenerate_reports_failing_stage(monkeypatch):
    monkeypatch.setattr(effmodel, "identify_kernel_form", lambda H: NotOfKnownForm("forced"))
    with pytest.raises(DegenerationError) as exc:
        degenerate(ConductorSpec(3, 0, -3))
    assert exc.value.stage == "identify_kernel_form"
    assert "forced" in str(exc.value)


def test_degenerate_is_deterministic():
    a = degenerate(ConductorSpec(5, -25, 0)).to_json()
    b = degenerate(ConductorSpec(5, -25, 0)).to_json()
    assert a == b
