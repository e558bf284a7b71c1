"""Planar polynomial vector fields whose coefficients are parameter polynomials.

A family is ``x' = rhs_x, y' = rhs_y`` with a nondegenerate focus at the
origin: linear part ``(-y + t*x, x + t*y)`` where ``t`` is an optional trace
parameter.  Two built-in families are provided (the quadratic family in
Bautin normal form and the cubic homogeneous family in Sibirsky form); any
other polynomial family of the same shape can be declared with :func:`custom`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Mapping, Sequence

from .poly import MultiPoly, VariableMismatch, parse

XY = ("x", "y")

QUADRATIC_PARAMS = ("l1", "l2", "l3", "l4", "l5", "l6")
CUBIC_PARAMS = ("lam", "omega", "theta", "a", "eta", "mu", "xi", "nu")


class FamilyKind(str, Enum):
    QUADRATIC = "bautin"
    CUBIC = "sibirsky"
    CUSTOM = "custom"


class NormalFormError(ValueError):
    """Family does not have the required linear part at the origin."""


@dataclass(frozen=True)
class SystemFamily:
    kind: FamilyKind
    params: tuple[str, ...]
    rhs_x: MultiPoly
    rhs_y: MultiPoly
    trace_param: str | None = None
    degree: int = field(default=0)

    @property
    def ring_vars(self) -> tuple[str, ...]:
        return XY + self.params

    def homogeneous_parts(self, p: MultiPoly) -> dict[int, list[MultiPoly]]:
        """Split an x,y polynomial into forms; form of degree m is the list of
        parameter-polynomial coefficients of x^(m-i) y^i, i = 0..m."""
        out: dict[int, list[MultiPoly]] = {}
        zero = MultiPoly.zero(self.params)
        for exp, c in p.terms.items():
            i, j = exp[0], exp[1]
            m = i + j
            form = out.setdefault(m, [zero] * (m + 1))
            mono = MultiPoly._raw(self.params, {exp[2:]: c})
            form[j] = form[j] + mono
        return out

    def with_trace_zero(self) -> "SystemFamily":
        if self.trace_param is None:
            return self
        z = {self.trace_param: 0}
        return SystemFamily(
            self.kind, self.params, self.rhs_x.subs(z), self.rhs_y.subs(z), self.trace_param, self.degree
        )

    def specialize(self, values: Mapping[str, object]) -> tuple[MultiPoly, MultiPoly]:
        """Substitute parameters (rationals or polynomials over x, y)."""
        return self.rhs_x.subs(values), self.rhs_y.subs(values)


def _validate(fam: SystemFamily) -> SystemFamily:
    ring = fam.ring_vars
    for p in (fam.rhs_x, fam.rhs_y):
        if p.vars != ring:
            raise VariableMismatch(f"right-hand side declared over {p.vars}, expected {ring}")
    if fam.trace_param is not None and fam.trace_param not in fam.params:
        raise NormalFormError(f"trace parameter {fam.trace_param!r} is not a declared parameter")
    px = fam.homogeneous_parts(fam.rhs_x)
    py = fam.homogeneous_parts(fam.rhs_y)
    for parts, name in ((px, "x"), (py, "y")):
        if 0 in parts and any(not c.is_zero() for c in parts[0]):
            raise NormalFormError(f"{name}' has a constant term; origin is not an equilibrium")
    t = (
        MultiPoly.var(fam.params, fam.trace_param)
        if fam.trace_param is not None
        else MultiPoly.zero(fam.params)
    )
    zero = MultiPoly.zero(fam.params)
    lin_x = px.get(1, [zero, zero])
    lin_y = py.get(1, [zero, zero])
    if not (lin_x[0] == t and lin_x[1] == -1 and lin_y[0] == 1 and lin_y[1] == t):
        raise NormalFormError(
            "linear part must be (-y + t*x, x + t*y) with t the trace parameter (or 0)"
        )
    return fam


def bautin() -> SystemFamily:
    ring = XY + QUADRATIC_PARAMS
    rx = parse("l1*x - y - l3*x^2 + (2*l2 + l5)*x*y + l6*y^2", ring)
    ry = parse("x + l1*y + l2*x^2 + (2*l3 + l4)*x*y - l2*y^2", ring)
    return _validate(SystemFamily(FamilyKind.QUADRATIC, QUADRATIC_PARAMS, rx, ry, "l1", 2))


def sibirsky() -> SystemFamily:
    ring = XY + CUBIC_PARAMS
    rx = parse(
        "-y + lam*x - (omega + theta - a)*x^3 - (eta - 3*mu)*x^2*y"
        " - (3*omega - 3*theta + 2*a - xi)*x*y^2 - (mu - nu)*y^3",
        ring,
    )
    ry = parse(
        "x + lam*y + (mu + nu)*x^3 + (3*omega + 3*theta + 2*a)*x^2*y"
        " + (eta - 3*mu)*x*y^2 + (omega - theta - a)*y^3",
        ring,
    )
    return _validate(SystemFamily(FamilyKind.CUBIC, CUBIC_PARAMS, rx, ry, "lam", 3))


def custom(rhs_x: str, rhs_y: str, params: Sequence[str], trace_param: str | None = None) -> SystemFamily:
    params = tuple(params)
    if set(params) & set(XY):
        raise NormalFormError("parameters may not be named x or y")
    ring = XY + params
    rx, ry = parse(rhs_x, ring), parse(rhs_y, ring)
    deg = max(_xy_degree(rx), _xy_degree(ry))
    return _validate(SystemFamily(FamilyKind.CUSTOM, params, rx, ry, trace_param, deg))


def _xy_degree(p: MultiPoly) -> int:
    return max((e[0] + e[1] for e in p.terms), default=0)


def by_name(name: str) -> SystemFamily:
    name = name.lower()
    if name in ("bautin", "quadratic"):
        return bautin()
    if name in ("sibirsky", "cubic"):
        return sibirsky()
    raise ValueError(f"unknown built-in family {name!r}")


# ---------------------------------------------------------------------------
# matching an explicit vector field against the family's coefficient pattern


@dataclass
class Projection:
    """Parameter values that reproduce a given field, plus any leftover."""

    values: dict[str, MultiPoly]
    residual_x: MultiPoly
    residual_y: MultiPoly
    free_params: tuple[str, ...]

    @property
    def consistent(self) -> bool:
        return self.residual_x.is_zero() and self.residual_y.is_zero()


def project(fam: SystemFamily, field_x: MultiPoly, field_y: MultiPoly) -> Projection:
    """Find parameter polynomials making the family equal the given field.

    `field_x`, `field_y` are polynomials over ``("x", "y") + symbols`` for some
    auxiliary symbols (for example ``eps`` and series coefficients).  Every
    family coefficient must be affine in the parameters, which holds for both
    built-in families.  Parameters the field does not determine are set to 0
    and listed in ``free_params``.
    """
    if field_x.vars != field_y.vars or field_x.vars[:2] != XY:
        raise VariableMismatch("field components must share a declaration starting with x, y")
    sym = field_x.vars[2:]
    clash = set(sym) & set(fam.params)
    if clash:
        raise VariableMismatch(f"field symbols {sorted(clash)} collide with family parameters")
    n = len(fam.params)
    # row per (component, monomial): constant + linear coefficients in params
    rows: list[tuple[list[Fraction], Fraction, MultiPoly]] = []
    monos = set()
    for p in (fam.rhs_x, fam.rhs_y, field_x, field_y):
        monos.update((e[0], e[1]) for e in p.terms)
    zero_sym = MultiPoly.zero(sym)
    for comp, fp, gp in ((0, fam.rhs_x, field_x), (1, fam.rhs_y, field_y)):
        fam_coeffs: dict[tuple[int, int], list] = {}
        for e, c in fp.terms.items():
            if sum(e[2:]) > 1:
                raise ValueError("family coefficients are not affine in the parameters")
            slot = fam_coeffs.setdefault((e[0], e[1]), [Fraction(0)] * (n + 1))
            k = next((i for i, v in enumerate(e[2:]) if v), None)
            slot[n if k is None else k] += c
        tgt: dict[tuple[int, int], MultiPoly] = {}
        for e, c in gp.terms.items():
            key = (e[0], e[1])
            tgt[key] = tgt.get(key, zero_sym) + MultiPoly._raw(sym, {e[2:]: c})
        for m in sorted(monos):
            slot = fam_coeffs.get(m, [Fraction(0)] * (n + 1))
            rhs = tgt.get(m, zero_sym) - slot[n]
            rows.append((list(slot[:n]), rhs, (comp, m)))
    # exact Gaussian elimination with polynomial right-hand sides
    mat = [r[0] for r in rows]
    rhs = [r[1] for r in rows]
    tags = [r[2] for r in rows]
    pivots: list[tuple[int, int]] = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, len(mat)) if mat[i][col] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        rhs[r], rhs[piv] = rhs[piv], rhs[r]
        tags[r], tags[piv] = tags[piv], tags[r]
        inv = 1 / mat[r][col]
        mat[r] = [v * inv for v in mat[r]]
        rhs[r] = rhs[r].scale(inv)
        for i in range(len(mat)):
            if i != r and mat[i][col] != 0:
                f = mat[i][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
                rhs[i] = rhs[i] - rhs[r].scale(f)
        pivots.append((r, col))
        r += 1
    values = {p: zero_sym for p in fam.params}
    pivot_cols = {c for _, c in pivots}
    for row, col in pivots:
        values[fam.params[col]] = rhs[row]
    free = tuple(p for i, p in enumerate(fam.params) if i not in pivot_cols)
    # residual: field minus family evaluated at the solution
    ring = field_x.vars
    sub = {p: v.to_vars(ring) for p, v in values.items()}
    fx = fam.rhs_x.subs(sub, ring)
    fy = fam.rhs_y.subs(sub, ring)
    return Projection(values, field_x - fx, field_y - fy, free)
