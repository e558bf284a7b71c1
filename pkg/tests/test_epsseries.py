import random
from fractions import Fraction

import pytest

from bautin.epsseries import (
    FLAT,
    HypothesisViolation,
    ParamSeries,
    expand,
    melnikov_order,
    melnikov_symbolic,
    subst_series,
)
from bautin.families import bautin, custom
from bautin.lemmas import reference_focal_values
from bautin.liapunov import focal_values
from bautin.poly import MultiPoly, parse

QUAD = bautin().params


@pytest.fixture(scope="module")
def quad_reference():
    vals, _ = reference_focal_values("bautin")
    return vals


def _symbolic_with_base(base, r_max=3):
    s = ParamSeries.symbolic(QUAD, r_max)
    return s.subs({f"{p}_0": v for p, v in base.items()})


def test_subst_series_linear():
    s = ParamSeries.from_table(("l3", "l6"), {"l3": {0: "l3_0", 1: "l3_1"}, "l6": {0: "l6_0", 1: "l6_1"}}, 1)
    rows = subst_series(parse("l3 - l6", ("l3", "l6")), s, 1)
    assert [str(r) for r in rows] == ["-l6_0 + l3_0", "-l6_1 + l3_1"]


def test_subst_series_on_lv_branch():
    s = ParamSeries.symbolic(("l3", "l5", "l6"), 2).subs({"l5_0": 0, "l3_0": "l6_0"})
    rows = subst_series(parse("l5*(l3 - l6)", ("l3", "l5", "l6")), s, 2)
    assert rows[0].is_zero() and rows[1].is_zero()
    assert rows[2] == parse("l5_1*(l3_1 - l6_1)", rows[2].vars)


def test_subst_series_constant():
    s = ParamSeries.symbolic(("a",), 3)
    rows = subst_series(MultiPoly.const(("a",), Fraction(7, 2)), s, 3)
    assert rows[0].constant_value() == Fraction(7, 2)
    assert all(r.is_zero() for r in rows[1:])


def test_generic_symmetric_rows(quad_reference):
    tab = expand(quad_reference, _symbolic_with_base({"l1": 0, "l2": 0, "l5": 0}), 2)
    ring = tab.ring
    assert tab.rows[1][1] == parse("(l3_0 - l6_0)*l5_1", ring)
    assert tab.rows[3][1] == parse("l4_0*(l3_0 - l6_0)^2*(l3_0*l6_0 - 2*l6_0^2)*l2_1", ring)


def test_trace_row(quad_reference):
    tab = expand(quad_reference, ParamSeries.symbolic(QUAD, 4), 4)
    for r in range(5):
        assert tab.rows[0][r] == parse(f"l1_{r}", tab.ring)


def test_center_branch_is_flat(quad_reference):
    s = _symbolic_with_base({"l1": 0}, 3).subs(
        {f"{p}_{l}": 0 for p in ("l2", "l5") for l in range(4)} | {f"l1_{l}": 0 for l in range(4)}
    )
    tab = expand(quad_reference, s, 3)
    assert all(c.is_zero() for row in tab.rows for c in row)
    assert melnikov_order(tab) == FLAT


def test_non_center_base_is_flagged(quad_reference):
    tab = expand(quad_reference, ParamSeries.from_table(QUAD, {"l1": {0: 1}}, 2), 2)
    assert tab.flags and "not a center" in tab.flags[0]
    assert melnikov_order(tab) == 0


def test_order_two_on_symmetric_lv(quad_reference):
    table = {"l3": {0: 1, 1: 1}, "l4": {0: 2}, "l6": {0: 1}, "l5": {1: 1}}
    tab = expand(quad_reference, ParamSeries.from_table(QUAD, table, 4), 4)
    assert melnikov_order(tab) == 2


def test_linear_center_order_one():
    fam = custom("l1*x - y", "x + l1*y", ["l1"], "l1")
    tab = expand(focal_values(fam, 2), ParamSeries.from_table(("l1",), {"l1": {1: 1}}, 3), 3)
    assert melnikov_order(tab) == 1


def test_order_with_numeric_binding(quad_reference):
    tab = expand(quad_reference, ParamSeries.symbolic(QUAD, 3).subs({f"{p}_0": 0 for p in QUAD}), 3)
    bound = {n: 0 for n in tab.ring} | {"l5_2": 1}
    # v3 = l5*(l3 - l6) needs l3 - l6 nonzero too
    assert melnikov_order(tab, bound) == FLAT
    bound |= {"l3_1": 1}
    assert melnikov_order(tab, bound) == 3


def test_symbolic_vector_and_violation(quad_reference):
    tab = expand(quad_reference, ParamSeries.from_table(QUAD, {"l1": {1: "l1_1"}}, 2, extra_symbols=["l1_1"]), 2)
    m = melnikov_symbolic(tab, 1)
    assert [str(c) for c in m.coeffs] == ["l1_1", "0", "0", "0"]
    with pytest.raises(HypothesisViolation) as err:
        melnikov_symbolic(tab, 2)
    assert (err.value.j, err.value.r) == (0, 1)


def test_vanishing_chain(quad_reference):
    table = {"l3": {0: 1, 1: 1}, "l4": {0: 2}, "l6": {0: 1}, "l5": {1: 1}}
    tab = expand(quad_reference, ParamSeries.from_table(QUAD, table, 4), 4)
    k = melnikov_order(tab)
    assert any(not c.is_zero() for c in melnikov_symbolic(tab, k).coeffs)
    with pytest.raises(HypothesisViolation):
        melnikov_symbolic(tab, k + 1)


def test_r_max_must_be_positive(quad_reference):
    with pytest.raises(ValueError):
        expand(quad_reference, ParamSeries.symbolic(QUAD, 1), 0)


@pytest.mark.parametrize("seed", range(5))
def test_expand_commutes_with_binding(quad_reference, seed):
    rng = random.Random(seed)
    r_max = 3
    s = ParamSeries.symbolic(QUAD, r_max, tail="zero")
    values = {n: Fraction(rng.randint(-5, 5), rng.randint(1, 4)) for n in s.ring}
    symbolic = expand(quad_reference, s, r_max)
    numeric = expand(quad_reference, s.subs(values), r_max)
    for j, row in enumerate(symbolic.rows):
        for r in range(r_max + 1):
            assert row[r].eval(values) == numeric.rows[j][r].eval({}), (j, r)


def test_table_json_shape(quad_reference):
    tab = expand(quad_reference, ParamSeries.from_table(QUAD, {"l1": {1: 1}}, 1), 1)
    doc = tab.to_json()
    assert set(doc) == {"family", "r_max", "rows"}
    assert {"j": 0, "r": 1, "poly": "1"} in doc["rows"]
