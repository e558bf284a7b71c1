"""Melnikov functions: line integral for the first one, eps-ladder
extraction for any order, and estimation of the Bautin basis."""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from ..essential import CenterCase, EssentialPlan, essential_plan
from .flow import (DEFAULT_TOL, FlowSpec, NonReturnError, NumericError, Tolerances, displacement,
                   m1_line_integral)
from .systems import first_order_terms, plan_flow


@dataclass(frozen=True)
class Ladder:
    m0: int = 6
    steps: int = 6

    def values(self) -> np.ndarray:
        mags = [2.0 ** -m for m in range(self.m0, self.m0 + self.steps + 1)]
        return np.array(sorted([-e for e in mags] + mags))


@dataclass
class MkEstimate:
    order: int | None  # None when flat to tolerance
    value: float
    coefficients: list[float]
    noise: list[float]
    k_hint: int
    note: str = ""

    @property
    def flat(self) -> bool:
        return self.order is None


def _fit(eps: np.ndarray, d: np.ndarray, degree: int, sigma_floor: float):
    A = np.vstack([eps ** (i + 1) for i in range(degree)]).T
    coef, *_ = np.linalg.lstsq(A, d, rcond=None)
    resid = d - A @ coef
    dof = max(len(d) - degree, 1)
    sigma = max(float(np.sqrt(resid @ resid / dof)), sigma_floor)
    spread = np.sqrt(np.diag(np.linalg.inv(A.T @ A)))
    return coef, sigma * spread, sigma_floor * spread


def _ladder_fit(eps, d, k_hint, sigma_floor):
    deg = k_hint + 2
    c, se, roundoff = _fit(eps, d, deg, sigma_floor)
    c_more, _, _ = _fit(eps, d, deg + 1, sigma_floor)
    noise = 10 * (se + np.abs(c - c_more[:deg]))
    order = next((i + 1 for i in range(deg) if abs(c[i]) > noise[i]), None)
    return c, noise, order, roundoff


def extract_mk(flow: FlowSpec, h: float, k_hint: int, ladder: Ladder = Ladder(),
               tol: Tolerances = DEFAULT_TOL, adaptive: bool = True, conv_rtol: float = 1e-7,
               m0_max: int = 16) -> MkEstimate:
    """Leading eps-coefficient of the displacement at level h.

    The displacement is fitted on the ladder by a polynomial in eps through
    the origin of degree ``k_hint + 2``.  A coefficient counts as nonzero when
    it exceeds ten times its statistical error plus its change under one extra
    fitting degree.  With ``adaptive`` the ladder moves to smaller eps, one
    rung at a time, until the leading coefficient is stable to ``conv_rtol``;
    rungs whose orbits leave the annulus also push the ladder down.
    """
    x0 = flow.x_of_h(h)
    in_h = flow.H is not None
    sigma_floor = 10 * (tol.map_rtol * x0 + tol.map_atol)
    cache: dict[float, float] = {}

    def d_at(e: float) -> float:
        if e not in cache:
            cache[e] = displacement(flow, x0, e, in_h=in_h, tol=tol)
        return cache[e]

    m0 = ladder.m0
    prev = None
    notes = []
    while True:
        cur = Ladder(m0, ladder.steps)
        eps = cur.values()
        try:
            d = np.array([d_at(float(e)) for e in eps])
        except NumericError:
            if m0 >= m0_max:
                raise NonReturnError(f"no eps-ladder down to 2^-{m0} returns at h = {h}") from None
            m0 += 1
            continue
        c, noise, order, se = _ladder_fit(eps, d, k_hint, sigma_floor)
        if not adaptive:
            break
        idx = (order or k_hint) - 1
        if prev is not None:
            change = abs(c[idx] - prev[0][idx])
            if change <= conv_rtol * max(abs(c[idx]), abs(prev[0][idx])) + 10 * se[idx]:
                break
        if m0 >= m0_max:
            notes.append("ladder did not converge")
            break
        prev = (c, noise, order)
        m0 += 1
    if m0 != ladder.m0:
        notes.append(f"ladder m0={m0}")
    if order is None:
        notes.append("flat to tolerance")
    elif order != k_hint:
        notes.append(f"leading order {order} differs from the hint {k_hint}")
    value = float(c[order - 1]) if order else 0.0
    return MkEstimate(order, value, [float(v) for v in c], [float(v) for v in noise], k_hint, "; ".join(notes))


@dataclass
class Zero:
    h: float
    multiplicity: int
    residual: float
    kind: str  # "crossing" or "touch"
    warning: str = ""

    def to_json(self) -> dict:
        out = {"h": self.h, "multiplicity": self.multiplicity, "residual": self.residual, "kind": self.kind}
        if self.warning:
            out["warning"] = self.warning
        return out


@dataclass
class MelnikovCurve:
    order: int
    grid: list[tuple[float, float]]
    method: str  # "line_integral" or "eps_ladder"
    zeros: list[Zero] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    evaluator: Callable[[float], float] | None = field(default=None, repr=False, compare=False)

    @property
    def hs(self) -> np.ndarray:
        return np.array([g[0] for g in self.grid])

    @property
    def values(self) -> np.ndarray:
        return np.array([g[1] for g in self.grid])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["h", "M", "method", "k"])
        for h, m in self.grid:
            w.writerow([repr(float(h)), repr(float(m)), self.method, self.order])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "method": self.method,
            "grid": [[float(h), float(m)] for h, m in self.grid],
            "zeros": [z.to_json() for z in self.zeros],
            "notes": self.notes,
        }


def h_grid(n: int, lo: float, hi: float, margin: float = 0.01) -> np.ndarray:
    """n points strictly inside (lo, hi), keeping a margin of the width at both ends."""
    w = hi - lo
    return np.linspace(lo + margin * w, hi - margin * w, n)


def m1_curve(flow: FlowSpec, hs: Sequence[float], p=None, q=None, tol: Tolerances = DEFAULT_TOL) -> MelnikovCurve:
    if p is None or q is None:
        p, q = first_order_terms(flow)
    unperturbed = flow.at_eps_zero()
    f = lambda h: m1_line_integral(unperturbed, p, q, float(h), tol=tol)
    grid = [(float(h), f(h)) for h in hs]
    return MelnikovCurve(1, grid, "line_integral", evaluator=f)


def ladder_curve(flow: FlowSpec, hs: Sequence[float], k_hint: int, ladder: Ladder = Ladder(),
                 tol: Tolerances = DEFAULT_TOL) -> MelnikovCurve:
    grid = []
    notes = []
    for h in hs:
        est = extract_mk(flow, float(h), k_hint, ladder, tol)
        if est.note and not est.note.startswith("ladder m0"):
            notes.append(f"h={float(h):.6g}: {est.note}")
        grid.append((float(h), est.coefficients[k_hint - 1]))
    f = lambda h: extract_mk(flow, float(h), k_hint, ladder, tol).coefficients[k_hint - 1]
    return MelnikovCurve(k_hint, grid, "eps_ladder", notes=notes, evaluator=f)


def compare_curves(a: MelnikovCurve, b: MelnikovCurve) -> dict:
    va, vb = a.values, b.values
    scale = np.maximum(np.abs(va), np.abs(vb))
    rel = np.abs(va - vb) / np.where(scale > 0, scale, 1.0)
    return {"max_relative_difference": float(rel.max()), "points": len(va)}


@dataclass
class BasisEstimate:
    tag: str
    order: int
    hs: list[float]
    functions: dict[int, list[float]]  # Bautin index j -> values of h^(2j+1) B_(2j+1)(h)
    assignments: dict[int, dict[str, str]]
    missing: list[int]
    method: str

    def matrix(self) -> np.ndarray:
        return np.array([self.functions[j] for j in sorted(self.functions)]).T

    def fit(self, values: Sequence[float]) -> tuple[np.ndarray, float]:
        """Least-squares coefficients and relative residual of a curve in the span."""
        A = self.matrix()
        v = np.asarray(values, dtype=float)
        c, *_ = np.linalg.lstsq(A, v, rcond=None)
        res = float(np.linalg.norm(A @ c - v) / max(np.linalg.norm(v), 1e-300))
        return c, res

    def to_json(self) -> dict:
        return {
            "tag": self.tag,
            "order": self.order,
            "method": self.method,
            "h": self.hs,
            "functions": {f"h^{2 * j + 1} B_{2 * j + 1}": v for j, v in sorted(self.functions.items())},
            "assignments": {str(j): a for j, a in sorted(self.assignments.items())},
            "missing_slots": self.missing,
        }


def _isolating_assignment(plan: EssentialPlan, j: int):
    """Small integer values of the essential parameters making exactly the
    j-th expected coefficient nonzero."""
    form = plan.form()
    params = plan.essential_params
    for values in itertools.product((0, 1, -1, 2), repeat=len(params)):
        assign = dict(zip(params, map(Fraction, values)))
        coeffs = {}
        for i, c in form.items():
            sub = {v: assign[v] for v in c.used_vars() if v in assign}
            leftover = set(c.used_vars()) - set(sub)
            if leftover:
                return None
            coeffs[i] = c.eval(sub) if c.used_vars() else c.constant_value()
        if coeffs.get(j, 0) != 0 and all(v == 0 for i, v in coeffs.items() if i != j):
            return assign, coeffs[j]
    return None


def bautin_basis_estimate(flow: FlowSpec, case: CenterCase, hs: Sequence[float], method: str = "auto",
                          ladder: Ladder = Ladder(), tol: Tolerances = DEFAULT_TOL) -> BasisEstimate:
    """Estimate h^(2j+1) B_(2j+1)(h) on a grid for every reachable slot j.

    ``flow`` is the unperturbed center; it supplies H and V and must agree
    with the case's base point.
    """
    plan = essential_plan(case)
    k = plan.k_star
    if method == "auto":
        method = "line_integral" if (k == 1 and flow.H is not None and flow.V is not None) else "eps_ladder"
    funcs, assigns, missing = {}, {}, []
    for j in sorted(plan.form()):
        found = _isolating_assignment(plan, j)
        if found is None:
            missing.append(j)
            continue
        assign, coeff = found
        pf = plan_flow(plan, assign, flow.H, flow.V)
        _check_base(flow, pf)
        if method == "line_integral":
            curve = m1_curve(pf, hs, tol=tol)
        else:
            curve = ladder_curve(pf, hs, k, ladder, tol)
        funcs[j] = [float(m / coeff) for m in curve.values]
        assigns[j] = {kk: str(v) for kk, v in assign.items()}
    return BasisEstimate(case.tag, k, [float(h) for h in hs], funcs, assigns, missing, method)


def _check_base(flow: FlowSpec, pf: FlowSpec) -> None:
    a, b = flow.at_eps_zero(), pf.at_eps_zero()
    if a.rhs_x != b.rhs_x or a.rhs_y != b.rhs_y:
        raise ValueError("the flow does not match the case's base point")
