"""Taylor coefficients of the return map from the polar-coordinate expansion.

Independent of the homological computation: with ``x = r cos t, y = r sin t``
a field ``(-y + P, x + Q)`` (P, Q vanishing at the origin) gives
``dr/dt = N(r, t) / D(r, t)``.  Writing ``r(t) = sum_k u_k(t) rho^k`` with
``r(0) = rho`` and integrating the coefficient ODEs over one turn yields the
Taylor coefficients of the return map ``rho -> r(2 pi)``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import solve_ivp

from ..families import SystemFamily
from ..liapunov import FocalValues
from ..poly import MultiPoly, parse


def _angular_terms(fields):
    """Monomial table for the angular parts of several fields at once.

    With ``x = r cos t, y = r sin t`` the radial numerator is
    ``sum_m r^m A_m(t)`` and the angular speed ``1 + sum_m r^(m-1) B_m(t)``;
    A_m and B_m are sums of ``cos^i sin^j`` monomials.  Returns the degree
    list, the exponent arrays and coefficient matrices (fields x monomials).
    """
    keys: dict[tuple[int, int, int], int] = {}
    rows_a: list[dict[int, float]] = []
    rows_b: list[dict[int, float]] = []
    for px, py in fields:
        ra: dict[int, float] = {}
        rb: dict[int, float] = {}
        for comp, poly in ((0, px), (1, py)):
            for (i, j), c in poly.terms.items():
                m = i + j
                if m < 1:
                    raise ValueError("the field must vanish at the origin")
                c = float(c)
                # x-component: A += cos*v, B -= sin*v; y-component: A += sin*v, B += cos*v
                ka = keys.setdefault((m, i + 1 - comp, j + comp), len(keys))
                kb = keys.setdefault((m, i + comp, j + 1 - comp), len(keys))
                ra[ka] = ra.get(ka, 0.0) + c
                rb[kb] = rb.get(kb, 0.0) + (c if comp else -c)
        rows_a.append(ra)
        rows_b.append(rb)
    degrees = sorted({m for m, _, _ in keys})
    ca = np.zeros((len(fields), len(keys)))
    cb = np.zeros_like(ca)
    for row, (ra, rb) in enumerate(zip(rows_a, rows_b)):
        for k, v in ra.items():
            ca[row, k] = v
        for k, v in rb.items():
            cb[row, k] = v
    exps = np.array(list(keys), dtype=int).reshape(-1, 3)
    select = np.array([[exps[k, 0] == m for m in degrees] for k in range(len(keys))], dtype=float)
    return degrees, exps[:, 1], exps[:, 2], ca, cb, select


def _mul(a, b, n):
    """Truncated product of coefficient rows (batch x (n+1))."""
    out = np.zeros_like(a)
    for i in range(n + 1):
        out[:, i:] += a[:, i : i + 1] * b[:, : n + 1 - i]
    return out


def return_map_batch(fields, order: int, rtol=1e-13, atol=1e-15) -> np.ndarray:
    """Return-map Taylor coefficients for several fields in one integration.

    Each field is ``(px, py)``: numeric polynomials in x, y vanishing at the
    origin, for the system ``x' = -y + px, y' = x + py``.  The angular speed
    must stay positive near the origin.  Row b holds c_0..c_order of
    ``rho -> r(2 pi)`` for field b.
    """
    fields = [(px.to_vars(("x", "y")), py.to_vars(("x", "y"))) for px, py in fields]
    degrees, ie, je, ca, cb, select = _angular_terms(fields)
    n = order
    nb = len(fields)
    unit = np.zeros((nb, n + 1))
    unit[:, 0] = 1.0

    def rhs(t, flat):
        r = np.concatenate((np.zeros((nb, 1)), flat.reshape(nb, n)), axis=1)
        trig = np.cos(t) ** ie * np.sin(t) ** je
        a_m = (ca * trig) @ select
        b_m = (cb * trig) @ select
        powers = {0: unit, 1: r}
        num = np.zeros((nb, n + 1))
        den = unit.copy()
        for d, m in enumerate(degrees):
            for k in range(2, m + 1):
                if k not in powers:
                    powers[k] = _mul(powers[k - 1], r, n)
            num += a_m[:, d : d + 1] * powers[m]
            den += b_m[:, d : d + 1] * powers[m - 1]
        q = np.zeros((nb, n + 1))
        for k in range(n + 1):
            q[:, k] = (num[:, k] - np.einsum("bi,bi->b", q[:, :k], den[:, k:0:-1])) / den[:, 0]
        return q[:, 1:].ravel()

    u0 = np.zeros((nb, n))
    u0[:, 0] = 1.0
    sol = solve_ivp(rhs, (0.0, 2 * math.pi), u0.ravel(), method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(sol.message)
    return np.concatenate((np.zeros((nb, 1)), sol.y[:, -1].reshape(nb, n)), axis=1)


def return_map_coefficients(px: MultiPoly, py: MultiPoly, order: int, rtol=1e-13, atol=1e-15) -> np.ndarray:
    """Coefficients c_k, k = 0..order, of rho -> r(2 pi) for a single field."""
    return return_map_batch([(px, py)], order, rtol, atol)[0]


# Substitutions that make v_1 .. v_(2j-1) vanish identically, per built-in
# family; stratum j uses the first j entries.  Checked exactly before use.
STRATA = {
    "bautin": ({"l1": "0"}, {"l5": "0"}, {"l4": "5*l6 - 5*l3"}),
    "sibirsky": ({"lam": "0"}, {"xi": "0"}, {"nu": "0"}, {"omega": "0"}, {"eta": "0"}),
}


@dataclass
class OracleReport:
    family: str
    points: int
    worst_relative: float
    per_value: list[dict]

    def passed(self, rtol: float = 1e-8) -> bool:
        return self.worst_relative <= rtol and all(v["points"] >= 1 for v in self.per_value)

    def to_json(self) -> dict:
        return {"family": self.family, "points": self.points, "worst_relative": self.worst_relative,
                "per_value": self.per_value}


def stratum_substitution(fam: SystemFamily, j: int) -> dict[str, MultiPoly]:
    """Substitution on which v_1 .. v_(2j-1) of a built-in family vanish."""
    sub: dict[str, MultiPoly] = {}
    for step in STRATA[fam.kind.value][:j]:
        for name, text in step.items():
            sub[name] = parse(text, fam.params).subs(sub, fam.params)
    return {k: v.subs(sub, fam.params) for k, v in sub.items()}


def oracle_check(vals: FocalValues, points: int = 50, seed: int = 0) -> OracleReport:
    """Compare the predicted leading displacement coefficient with the
    return-map expansion at random rational points of each stratum.

    For j >= 1 the prediction is ``2*pi*factors[j]*values[j]`` at points where
    v_1 .. v_(2j-1) vanish; for v_1 it is ``exp(2*pi*lam) - 1``.  ``vals`` is
    usually the output of ``align_to_reference``.
    """
    fam = vals.family
    if fam.kind.value not in STRATA:
        raise ValueError("the return-map oracle needs stratum data; only built-in families have it")
    rng = random.Random(seed)
    X, Y = MultiPoly.gens(("x", "y"))
    per_value = []
    worst = 0.0
    for j, value in enumerate(vals.values):
        sub = stratum_substitution(fam, j)
        for i in range(j):
            if not vals.values[i].subs(sub, fam.params).is_zero():
                raise AssertionError(f"stratum {j} does not annihilate v{2 * i + 1}")
        chosen = []
        tries = 0
        while len(chosen) < points and tries < 20 * points:
            tries += 1
            pt = {p: Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for p in fam.params}
            if j == 0:
                pt[fam.trace_param] /= 8
            pt.update({k: v.eval(pt) for k, v in sub.items()})
            val = vals.factors[j] * value.eval(pt)
            if val != 0:
                chosen.append((pt, val))
        fields = []
        for pt, _ in chosen:
            px, py = fam.specialize(pt)
            fields.append((px.to_vars(("x", "y")) + Y, py.to_vars(("x", "y")) - X))
        coeffs = return_map_batch(fields, 2 * j + 1) if fields else np.zeros((0, 2 * j + 2))
        errs = []
        for (pt, val), c in zip(chosen, coeffs):
            if j == 0:
                got, want = c[1] - 1, math.expm1(2 * math.pi * float(val))
            else:
                got, want = c[2 * j + 1], 2 * math.pi * float(val)
            errs.append(abs(got - want) / abs(want))
        worst = max([worst, *errs])
        per_value.append({"name": f"v{2 * j + 1}", "points": len(errs), "factor": str(vals.factors[j]),
                          "max_relative": float(max(errs)) if errs else None})
    return OracleReport(fam.kind.value, points, float(worst), per_value)
