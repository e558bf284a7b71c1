import math
import random
from fractions import Fraction

import pytest

from bautin.families import NormalFormError, bautin, custom, sibirsky
from bautin.liapunov import (
    CENTER_CONDITIONS,
    _sampled_factor,
    align_to_reference,
    center_variety_check,
    focal_values,
    reference_values,
)
from bautin.melnum.taylor import oracle_check, return_map_coefficients, stratum_substitution
from bautin.poly import parse

# frozen: certified once by exact reduction and by the return-map oracle
QUAD_FACTORS = ["1", "-1/8", "1/48", "-5/64"]
CUBIC_FACTORS = ["1", "1/8", "-5/8", "25/16", "5/64", "-5/192"]


def test_quadratic_low_order_values(quad_values):
    ring = bautin().params
    assert quad_values.values[0] == parse("l1", ring)
    assert quad_values.values[1] == parse("l5*l6 - l3*l5", ring)


def test_quadratic_alignment(quad_aligned):
    aligned, report = quad_aligned
    assert [a.method for a in report] == ["exact"] * 4
    assert [str(f) for f in aligned.factors] == QUAD_FACTORS


def test_cubic_alignment(cubic_aligned):
    aligned, report = cubic_aligned
    assert [a.method for a in report] == ["exact"] * 6
    assert [str(f) for f in aligned.factors] == CUBIC_FACTORS


def test_cubic_top_value_matches_factored_form(cubic_aligned):
    aligned, _ = cubic_aligned
    ring = sibirsky().params
    assert aligned.values[5] == parse("theta*(4*(mu^2 + theta^2) - a^2)*a^2", ring)


@pytest.mark.parametrize("fixture", ["quad_values", "cubic_values"])
def test_higher_values_do_not_involve_trace(fixture, request):
    vals = request.getfixturevalue(fixture)
    trace = vals.family.trace_param
    for v in vals.values[1:]:
        assert v.degree_in(trace) == 0


def test_normalization_log_is_consistent(quad_values):
    for step, v in zip(quad_values.log, quad_values.values[1:]):
        assert step.content > 0
        assert not step.raw.is_zero()
        assert v.content() == 1


def test_linear_center():
    fam = custom("l1*x - y", "x + l1*y", ["l1"], "l1")
    vals = focal_values(fam, 3)
    assert vals.values[0] == parse("l1", ("l1",))
    assert all(v.is_zero() for v in vals.values[1:])


def test_not_in_normal_form():
    with pytest.raises(NormalFormError):
        custom("2*x - y", "x", ["a"])


@pytest.mark.parametrize("family", ["bautin", "sibirsky"])
def test_center_conditions_annihilate(family, quad_values, cubic_values):
    vals = quad_values if family == "bautin" else cubic_values
    for name, cond in CENTER_CONDITIONS[family].items():
        assert center_variety_check(vals.family, vals, cond), name


def test_partial_condition_is_not_a_center(quad_values, cubic_values):
    assert not center_variety_check(quad_values.family, quad_values, {"l5": 0})
    assert not center_variety_check(cubic_values.family, cubic_values, {"lam": 0, "xi": 0})


def test_symmetric_conditions_from_examples(quad_values, cubic_values):
    assert center_variety_check(quad_values.family, quad_values, {"l1": 0, "l2": 0, "l5": 0})
    cond = {"lam": 0, "xi": 0, "nu": 0, "theta": 0}
    assert center_variety_check(cubic_values.family, cubic_values, cond)


def _stratum_sampler(fam):
    def sample(j, rng):
        sub = stratum_substitution(fam, j)
        pt = {p: Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for p in fam.params}
        pt.update({k: v.eval(pt) for k, v in sub.items()})
        return pt

    return sample


def test_sampled_tier_recovers_factors(quad_aligned):
    aligned, _ = quad_aligned
    fam = aligned.family
    sample = _stratum_sampler(fam)
    rng = random.Random(1)
    for j in range(1, 4):
        raw = aligned.log[j - 1].raw
        earlier = aligned.values[1:j]
        factor, detail = _sampled_factor(raw, aligned.values[j], earlier, j, sample, 200, rng)
        assert str(factor) == QUAD_FACTORS[j], detail


def test_sampled_tier_rejects_wrong_reference(quad_aligned):
    aligned, _ = quad_aligned
    fam = aligned.family
    wrong = parse("l2*l4*(l3 - l6)*(l4 + 4*l3 - 5*l6)", fam.params)
    factor, detail = _sampled_factor(aligned.log[1].raw, wrong, aligned.values[1:2], 2,
                                     _stratum_sampler(fam), 200, random.Random(0))
    assert factor is None
    assert "differ" in detail or "not constant" in detail


def test_zero_sets_agree_on_strata(quad_aligned):
    aligned, _ = quad_aligned
    fam = aligned.family
    sample = _stratum_sampler(fam)
    rng = random.Random(3)
    raws = [s.raw for s in aligned.log]
    for j in range(1, 4):
        for _ in range(200):
            pt = sample(j, rng)
            assert (raws[j - 1].eval(pt) == 0) == (aligned.values[j].eval(pt) == 0)


def test_return_map_of_linear_focus():
    x, y = parse("x", ("x", "y")), parse("y", ("x", "y"))
    c = return_map_coefficients(x.scale(Fraction(1, 100)), y.scale(Fraction(1, 100)), 3)
    assert c[1] == pytest.approx(math.exp(2 * math.pi * 0.01), rel=1e-12)
    assert abs(c[2]) < 1e-14 and abs(c[3]) < 1e-14


def test_oracle_small(quad_aligned):
    aligned, _ = quad_aligned
    rep = oracle_check(aligned, points=8, seed=5)
    assert rep.passed(1e-8)
    assert [v["points"] for v in rep.per_value] == [8] * 4
