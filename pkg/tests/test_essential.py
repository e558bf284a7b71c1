import random
from fractions import Fraction

import pytest

from bautin.essential import (
    NotACenter,
    UnclassifiedDegenerate,
    classify,
    essential_plan,
    phi_range_sample,
    plan_data,
    plan_keys,
    verify_plan,
)
from bautin.families import bautin, sibirsky
from bautin.liapunov import CENTER_CONDITIONS

Q_TAGS = {"Q-GenericLV", "Q-GenericSymmetric", "Q-GenericHamiltonian", "Q-GenericDarboux", "Q-SymLV",
          "Q-SymHamiltonian", "Q-SymDarboux", "Q-HamLV", "Q-HamTriangle", "Q-Linear"}
C_TAGS = {"C-GenHam1", "C-GenHam2", "C-GenSymmetric", "C-GenDarboux", "C-HamSymmetric", "C-SymDarboux",
          "C-Linear"}


def q(*vals):
    return dict(zip(bautin().params, vals))


def c(**vals):
    pt = {p: 0 for p in sibirsky().params}
    pt.update(vals)
    return pt


@pytest.mark.parametrize(
    "point, tag",
    [
        (q(0, 0, 0, 1, 0, -1), "Q-GenericSymmetric"),
        (q(0, 0, 0, 0, 0, 0), "Q-Linear"),
        (q(0, 1, 3, -10, 0, 1), "Q-GenericDarboux"),
        (q(0, 0, 1, 1, 0, 1), "Q-SymLV"),
        (q(0, 1, 1, 0, 0, 1), "Q-HamLV"),
        (q(0, 0, 1, 0, 0, 1), "Q-HamTriangle"),
        (q(0, 2, 1, 3, 5, 1), "Q-GenericLV"),
        (q(0, 1, 2, 0, 0, 1), "Q-GenericHamiltonian"),
        (q(0, 0, 2, 0, 0, 1), "Q-SymHamiltonian"),
    ],
)
def test_quadratic_classification(point, tag):
    assert classify(bautin(), point).tag == tag


def test_cubic_generic_hamiltonian():
    case = classify(sibirsky(), c(theta=1, nu=1))
    assert case.tag == "C-GenHam1"
    assert case.witness


def test_not_a_center():
    with pytest.raises(NotACenter, match="not on center variety"):
        classify(bautin(), q(1, 0, 0, 0, 0, 0))


def test_unclassified_lv_gap():
    # l1 = 0, l3 = l6 is a center, but no case in the list covers l5 = 0 with l2*l4 != 0
    with pytest.raises(UnclassifiedDegenerate) as err:
        classify(bautin(), q(0, 1, 1, 1, 0, 1))
    assert "Q-GenericLV" in err.value.failed


def _random_center(rng, family):
    fam = bautin() if family == "bautin" else sibirsky()
    name = rng.choice(sorted(CENTER_CONDITIONS[family]))
    cond = CENTER_CONDITIONS[family][name]
    from bautin.poly import parse

    free = {n: Fraction(rng.randint(-3, 3), rng.randint(1, 2)) for n in fam.params + ("s", "t", "u", "w")}
    pt = dict(free)
    for p, text in cond.items():
        pt[p] = parse(text).eval(free)
    return fam, {p: pt[p] for p in fam.params}


@pytest.mark.parametrize("family", ["bautin", "sibirsky"])
def test_partition_property(family):
    rng = random.Random(11)
    tags = Q_TAGS if family == "bautin" else C_TAGS
    seen = set()
    for _ in range(150):
        fam, pt = _random_center(rng, family)
        try:
            seen.add(classify(fam, pt).tag)
        except UnclassifiedDegenerate:
            pass
    assert seen <= tags
    assert len(seen) >= 3


def test_every_plan_verifies():
    keys = plan_keys()
    assert len(keys) == 17
    for key in keys:
        rep = verify_plan(essential_plan(key))
        assert rep.passed, (key, rep.failures)


@pytest.mark.parametrize(
    "key, k_star, params, fixed",
    [
        ("q-iv", 1, {"l1_1", "l2_1", "l4_1", "l5_1"}, {}),
        ("q-ix", 4, {"l1_4", "l5_3", "l2_1", "l4_1"}, {"l3_1": "1"}),
        ("c-vi", 5, {"lam_5", "xi_5", "nu_4", "omega_3", "eta_2", "theta_1"}, {"a_1": "1"}),
    ],
)
def test_plan_examples(key, k_star, params, fixed):
    plan = essential_plan(key)
    assert plan.k_star == k_star
    assert set(plan.essential_params) == params
    assert plan.data.fixed == fixed


def test_plan_from_classified_point():
    pt = q(0, 0, 0, 1, 0, -1)
    plan = essential_plan(classify(bautin(), pt), pt)
    assert plan.tag == "Q-GenericSymmetric" and plan.k_star == 1
    rep = verify_plan(plan)
    assert rep.passed
    assert rep.computed_row[0] == "l1_1"


def test_zeroed_parameter_is_degenerate_not_failing():
    rep = verify_plan(essential_plan("q-ii").with_overrides(l5_1=0))
    assert rep.passed
    assert any("degenerate" in n for n in rep.notes)


def test_order_too_high_names_earlier_row():
    plan = essential_plan("q-ii")
    rep = verify_plan(plan.with_order(plan.k_star + 1))
    assert not rep.passed
    assert any(f.startswith(f"row r={plan.k_star} nonzero") for f in rep.failures)


def test_order_too_low_fails():
    plan = essential_plan("q-ix")
    assert not verify_plan(plan.with_order(plan.k_star - 1)).passed


def test_plan_lookup_by_tag():
    assert plan_data("Q-HamTriangle").key == "q-ix"
    with pytest.raises(KeyError):
        plan_data("nope")


def test_range_darboux_full_rank():
    rep = phi_range_sample(classify(bautin(), q(0, 1, 3, -10, 0, 1)), 1, 100, seed=0)
    assert rep.affine_rank == 4
    assert all(cl["verdict"] for cl in rep.claims)


def test_range_sym_lv_fourth_row_zero():
    for k in (2, 3):
        rep = phi_range_sample(classify(bautin(), q(0, 0, 1, 1, 0, 1)), k, 30, seed=1)
        assert all(v[3] == "0" for v in rep.vectors_preview)
        assert all(cl["verdict"] for cl in rep.claims)


def test_range_linear_only_first():
    rep = phi_range_sample(classify(bautin(), q(0, 0, 0, 0, 0, 0)), 1, 20, seed=2)
    assert rep.affine_rank == 1
    assert all(cl["verdict"] for cl in rep.claims)


def test_range_ham_lv_order_four_sign():
    rep = phi_range_sample(classify(bautin(), q(0, 1, 1, 0, 0, 1)), 4, 30, seed=0)
    verdicts = {cl["claim"]: cl["verdict"] for cl in rep.claims}
    # the region as printed is never hit; the sign-corrected one always is
    assert verdicts == {
        "samples lie in {(a,b,c,d): d != 0, s*c - 5*d = 0} as printed": False,
        "samples lie in {(a,b,c,d): d != 0, s*c + 5*d = 0} (sign-corrected)": True,
    }


def test_range_report_json():
    rep = phi_range_sample(classify(bautin(), q(0, 0, 1, 0, 0, 1)), 2, 10, seed=0)
    doc = rep.to_json()
    assert doc["samples"] == 10 and doc["k"] == 2
