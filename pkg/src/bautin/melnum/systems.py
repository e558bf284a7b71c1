"""Building numeric flows from the symbolic families and plans."""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from ..essential import EssentialPlan
from ..families import SystemFamily, bautin
from ..poly import MultiPoly
from .flow import FlowSpec

# quadratic center with first integral sqrt(x^2 + y^2) and the invariant line y = -1
EXAMPLE_POINT = {"l1": 0, "l2": 0, "l3": 0, "l4": 1, "l5": 0, "l6": -1}
EXAMPLE_H = "sqrt(x**2 + y**2)"
EXAMPLE_V = "(1 + y)*sqrt(x**2 + y**2)"
EXAMPLE_ANNULUS = (0.0, 1.0)
# first-order perturbation whose M1 has simple zeros near h = 2/5 and h = 4/5;
# found by taking a kernel vector of the three basis values at those levels
TWO_ZERO_DIRECTION = {"l1": "23/1286", "l2": "293/513", "l5": "1"}

_RING = ("x", "y", "eps")


def family_flow(fam: SystemFamily, point: Mapping[str, object], direction: Mapping[str, object] | None = None,
                H: str | None = None, V: str | None = None) -> FlowSpec:
    """Flow of ``fam`` at ``point + eps * direction``."""
    eps = MultiPoly.var(_RING, "eps")
    direction = direction or {}
    unknown = set(direction) - set(fam.params)
    if unknown:
        raise ValueError(f"unknown parameters in perturbation: {sorted(unknown)}")
    vals = {}
    for p in fam.params:
        v = MultiPoly.const(_RING, Fraction(point[p]))
        if p in direction:
            v = v + eps * Fraction(direction[p])
        vals[p] = v
    return FlowSpec(fam.rhs_x.subs(vals, _RING), fam.rhs_y.subs(vals, _RING), H, V)


def plan_flow(plan: EssentialPlan, values: Mapping[str, object], H: str | None = None,
              V: str | None = None) -> FlowSpec:
    """Flow of a numeric-base plan with its essential parameters fixed."""
    fx, fy = plan.perturbed_field()
    sub = {k: MultiPoly.const((), Fraction(v)) for k, v in values.items()}
    missing = (set(fx.used_vars()) | set(fy.used_vars())) - set(_RING) - set(sub)
    if missing:
        raise ValueError(f"values needed for {sorted(missing)}")
    return FlowSpec(fx.subs(sub, _RING), fy.subs(sub, _RING), H, V)


def example_flow(direction: Mapping[str, object] | None = None) -> FlowSpec:
    return family_flow(bautin(), EXAMPLE_POINT, direction, EXAMPLE_H, EXAMPLE_V)


def first_order_terms(flow: FlowSpec) -> tuple[MultiPoly, MultiPoly]:
    """Coefficients (p, q) of eps^1 in the field."""
    out = []
    for f in (flow.rhs_x, flow.rhs_y):
        d = f.diff("eps").subs({"eps": MultiPoly.const((), 0)}, ("x", "y"))
        out.append(d)
    return out[0], out[1]


def series_flow(fam: SystemFamily, point: Mapping[str, object], series: Mapping[str, Mapping],
                H: str | None = None, V: str | None = None) -> FlowSpec:
    """Flow of ``fam`` with parameters ``point + sum_l eps^l * series[p][l]``."""
    eps = MultiPoly.var(_RING, "eps")
    unknown = set(series) - set(fam.params)
    if unknown:
        raise ValueError(f"unknown parameters in series: {sorted(unknown)}")
    vals = {}
    for p in fam.params:
        v = MultiPoly.const(_RING, Fraction(point[p]))
        for ell, c in series.get(p, {}).items():
            ell = int(ell)
            if ell == 0:
                raise ValueError(f"series for {p} sets order 0; base values come from the point")
            v = v + eps**ell * Fraction(c)
        vals[p] = v
    return FlowSpec(fam.rhs_x.subs(vals, _RING), fam.rhs_y.subs(vals, _RING), H, V)
