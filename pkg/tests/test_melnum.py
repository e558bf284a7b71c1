import math
import random
from fractions import Fraction

import numpy as np
import pytest

from bautin.essential import classify, essential_plan
from bautin.families import bautin
from bautin.melnum.bifurcation import verify_bifurcation
from bautin.melnum.expr import Expr, ExpressionError
from bautin.melnum.flow import (
    CapabilityError,
    FlowSpec,
    FlowSpecError,
    NonReturnError,
    Tolerances,
    displacement,
    integrate_orbit,
    m1_line_integral,
    return_map,
)
from bautin.melnum.melnikov import (
    Ladder,
    bautin_basis_estimate,
    compare_curves,
    extract_mk,
    h_grid,
    ladder_curve,
    m1_curve,
)
from bautin.melnum.systems import EXAMPLE_POINT, TWO_ZERO_DIRECTION, example_flow, family_flow, plan_flow
from bautin.melnum.zeros import find_zeros, zero_count
from bautin.poly import parse

RING = ("x", "y", "eps")


def linear_flow(with_h=True):
    return FlowSpec(parse("-y + eps*x", RING), parse("x + eps*y", RING),
                    "sqrt(x**2 + y**2)" if with_h else None, "sqrt(x**2 + y**2)" if with_h else None)


def xy():
    return parse("x", ("x", "y")), parse("y", ("x", "y"))


# --- expressions and flow specs ---------------------------------------------


def test_expression_evaluator():
    e = Expr("(1 + y)*sqrt(x^2 + y^2)")
    assert e(3.0, 4.0) == pytest.approx(5.0 * 5.0)
    gx, gy = e.gradient(3.0, 4.0)
    assert gx == pytest.approx(5.0 * 3 / 5)
    assert gy == pytest.approx(5.0 + 5.0 * 4 / 5)


@pytest.mark.parametrize("text", ["__import__('os')", "x.real", "exp(x)", "x +", "z"])
def test_expression_rejects(text):
    with pytest.raises(ExpressionError):
        Expr(text)


def test_bad_linear_part():
    with pytest.raises(FlowSpecError):
        FlowSpec(parse("-2*y", RING), parse("x", RING))


def test_inconsistent_first_integral():
    with pytest.raises(FlowSpecError):
        FlowSpec(parse("-y + x^2", RING), parse("x", RING), "sqrt(x**2 + y**2)")


def test_unbound_parameter():
    with pytest.raises(FlowSpecError):
        FlowSpec(parse("-y + a*x^2", RING + ("a",)), parse("x", RING))


def test_tolerances_from_mapping():
    tol = Tolerances.from_mapping({"rtol": 1e-9})
    assert tol.rtol == 1e-9 and tol.atol == Tolerances().atol


# --- orbits and return maps -------------------------------------------------


def test_linear_center_returns_to_start():
    tr = integrate_orbit(linear_flow(), (0.7, 0.0))
    assert tr.crossing[0] == pytest.approx(0.7, abs=1e-9)
    assert tr.period == pytest.approx(2 * math.pi, rel=1e-9)


def test_example_orbit_conserves_h():
    tr = integrate_orbit(example_flow(), (0.5, 0.0))
    assert tr.max_h_drift <= 1e-9
    assert tr.crossing[0] == pytest.approx(0.5, abs=1e-9)


@pytest.mark.parametrize("eps", [1e-2, 1e-3])
def test_linear_focus_return(eps):
    h = 0.4
    expected = h * math.expm1(2 * math.pi * eps)
    assert displacement(linear_flow(), h, eps) == pytest.approx(expected, rel=1e-8)
    tr = integrate_orbit(linear_flow(), (h, 0.0), eps=eps)
    assert tr.crossing[0] - h == pytest.approx(expected, rel=1e-6)


def test_center_has_zero_displacement():
    f = example_flow({"l2": 1})
    for h in (0.2, 0.5, 0.8):
        assert abs(displacement(f, h, 0.0)) <= 1e-9


def test_return_map_derivative_matches_difference():
    f = example_flow(TWO_ZERO_DIRECTION)
    x, eps, step = 0.5, 1e-2, 1e-5
    p, dp = return_map(f, x, eps, derivative=True)
    fd = (return_map(f, x + step, eps) - return_map(f, x - step, eps)) / (2 * step)
    assert dp == pytest.approx(fd, rel=1e-6)


def test_non_rotating_field():
    f = FlowSpec(parse("-y + eps*x^2", RING), parse("x - x^2", RING))
    with pytest.raises(NonReturnError):
        return_map(f, 1.5, 0.0)


# --- line integral ----------------------------------------------------------


@pytest.mark.parametrize("h", [0.1, 0.5, 2.0])
def test_line_integral_sign_calibration(h):
    p, q = xy()
    assert m1_line_integral(linear_flow(), p, q, h) == pytest.approx(2 * math.pi * h, rel=1e-9)


def test_line_integral_needs_h_and_v():
    p, q = xy()
    with pytest.raises(CapabilityError):
        m1_line_integral(linear_flow(with_h=False), p, q, 0.5)


def test_line_integral_exact_form_vanishes():
    # p dy - q dx = d(x*y) along the circles when (p, q) = (x, -y)
    f = linear_flow()
    p, q = parse("x", ("x", "y")), parse("-y", ("x", "y"))
    assert abs(m1_line_integral(f, p, q, 0.6)) < 1e-12


def test_line_integral_is_linear():
    f = example_flow()
    rng = random.Random(4)
    ring = ("x", "y")
    mons = ["x^2", "x*y", "y^2", "x", "y"]

    def rand_poly():
        return parse(" + ".join(f"{rng.randint(-5, 5)}*{m}" for m in mons), ring)

    p1, q1, p2, q2 = (rand_poly() for _ in range(4))
    a, b = rng.uniform(-2, 2), rng.uniform(-2, 2)
    fa, fb = Fraction(a).limit_denominator(1000), Fraction(b).limit_denominator(1000)
    h = 0.45
    lhs = m1_line_integral(f, p1.scale(fa) + p2.scale(fb), q1.scale(fa) + q2.scale(fb), h)
    rhs = float(fa) * m1_line_integral(f, p1, q1, h) + float(fb) * m1_line_integral(f, p2, q2, h)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-13)


def test_displacement_matches_line_integral():
    f = example_flow({"l2": 1, "l5": 1})
    eps = 1e-5
    for h in (0.3, 0.6):
        m1 = m1_curve(f, [h]).values[0]
        assert displacement(f, h, eps, in_h=True) / eps == pytest.approx(m1, rel=1e-4)


# --- eps ladder -------------------------------------------------------------


def test_ladder_values():
    vals = Ladder(6, 6).values()
    assert len(vals) == 14
    assert max(vals) == 2.0**-6 and min(vals) == -(2.0**-6)


def test_ladder_linear_focus():
    est = extract_mk(linear_flow(), 0.5, 1)
    assert est.order == 1
    assert est.value == pytest.approx(2 * math.pi * 0.5, rel=1e-8)


def test_ladder_detects_second_order():
    pt = {"l1": 0, "l2": 0, "l3": 1, "l4": 1, "l5": 0, "l6": 1}
    plan = essential_plan(classify(bautin(), pt), pt)
    assert plan.tag == "Q-SymLV"
    f = plan_flow(plan, {p: 1 for p in plan.essential_params})
    est = extract_mk(f, 0.2, 2)
    assert est.order == 2


def test_ladder_flat_on_center_branch():
    pt = {"l1": 0, "l2": 0, "l3": 1, "l4": 1, "l5": 0, "l6": 1}
    # moving l3 and l4 keeps l2 = l5 = 0: still a (symmetric) center
    est = extract_mk(family_flow(bautin(), pt, {"l3": 1, "l4": 1}), 0.2, 1)
    assert est.flat


def test_ladder_reports_hint_disagreement():
    est = extract_mk(linear_flow(), 0.5, 2)
    assert est.order == 1
    assert "hint" in est.note


def test_cross_method_generic_symmetric():
    f = example_flow({"l2": 1})
    hs = [0.1 * i for i in range(1, 10)]
    agree = compare_curves(m1_curve(f, hs), ladder_curve(f, hs, 1))
    assert agree["max_relative_difference"] <= 1e-6


# --- basis ------------------------------------------------------------------


def test_basis_estimate_and_span():
    f = example_flow()
    case = classify(bautin(), EXAMPLE_POINT)
    hs = h_grid(40, 0.0, 1.0)
    basis = bautin_basis_estimate(f, case, hs)
    assert basis.method == "line_integral"
    assert sorted(basis.functions) == [0, 1, 2] and not basis.missing
    # the l1 slot starts like 2*pi*h
    assert basis.functions[0][0] / hs[0] == pytest.approx(2 * math.pi, rel=0.1)
    rng = random.Random(0)
    for _ in range(2):
        direction = {p: rng.uniform(-1, 1) for p in ("l1", "l2", "l5")}
        direction = {p: Fraction(v).limit_denominator(100) for p, v in direction.items()}
        _, res = basis.fit(m1_curve(example_flow(direction), hs).values)
        assert res <= 1e-6


# --- zeros ------------------------------------------------------------------


def test_simple_zeros():
    f = lambda h: h * (h - 0.5) * (h - 0.75)
    hs = np.linspace(0.01, 0.99, 50)
    zs = find_zeros((hs, f(hs)), f)
    assert [round(z.h, 10) for z in zs] == [0.5, 0.75]
    assert all(z.multiplicity == 1 for z in zs)


def test_double_zero():
    f = lambda h: (h - 0.5) ** 2
    hs = np.linspace(0.01, 0.99, 50)
    zs = find_zeros((hs, f(hs)), f)
    assert len(zs) == 1
    assert zs[0].h == pytest.approx(0.5, abs=1e-6)
    assert zs[0].multiplicity == 2
    assert zero_count(zs) == 2


def test_no_spurious_zero_near_positive_minimum():
    f = lambda h: (h - 0.5) ** 2 + 1e-3
    hs = np.linspace(0.01, 0.99, 50)
    assert find_zeros((hs, f(hs)), f) == []


def test_zero_count_stable_under_refinement():
    f = example_flow(TWO_ZERO_DIRECTION)
    # the default map tolerances are already near the double-precision floor,
    # so the coarse run uses 10x looser ones
    loose = Tolerances(map_rtol=1e-12, map_atol=1e-14)
    coarse = find_zeros(m1_curve(f, h_grid(40, 0.0, 1.0), tol=loose))
    fine = find_zeros(m1_curve(f, h_grid(80, 0.0, 1.0)))
    assert [z.multiplicity for z in coarse] == [z.multiplicity for z in fine] == [1, 1]
    for a, b in zip(coarse, fine):
        assert a.h == pytest.approx(b.h, abs=1e-8)


# --- bifurcation ------------------------------------------------------------


def test_two_cycles_opposite_stability():
    f = example_flow(TWO_ZERO_DIRECTION)
    reps = [verify_bifurcation(f, h, 1e-3) for h in (0.4, 0.8)]
    assert all(r.found for r in reps)
    assert reps[0].derivative < 1 < reps[1].derivative
    assert {r.stability for r in reps} == {"attracting", "repelling"}
    for r, h in zip(reps, (0.4, 0.8)):
        assert abs(r.h_cycle - h) < 0.05
        assert r.hyperbolicity >= 1e-4


def test_unperturbed_is_a_center():
    rep = verify_bifurcation(example_flow(TWO_ZERO_DIRECTION), 0.4, 0.0)
    assert not rep.found
    assert rep.verdict.startswith("center")


def test_no_cycle_away_from_zero():
    rep = verify_bifurcation(example_flow(TWO_ZERO_DIRECTION), 0.6, 1e-3)
    assert not rep.found or rep.distance > 0.05
