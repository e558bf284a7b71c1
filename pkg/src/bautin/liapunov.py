"""Focal values of a polynomial focus by the homological (Liapunov function) method.

We look for ``F = (x^2 + y^2)/2 + F_3 + F_4 + ...`` with each ``F_k`` a
homogeneous form whose coefficients are parameter polynomials, such that the
derivative of ``F`` along the flow is ``sum_j c_j (x^2 + y^2)^(j+1)``.  With
the rotation operator ``L = x d/dy - y d/dx`` the degree-k part reads

    L F_k = -R_k + c (x^2 + y^2)^(k/2)

where ``R_k`` collects products of lower ``F_m`` with the nonlinear terms.
``L`` is invertible on odd degrees; on even degrees its image is the set of
forms with zero average over the unit circle, so ``c`` is that average.  The
raw value ``c_j`` from degree ``2j + 2`` is proportional to the leading
coefficient of the displacement map: ``d(r) = 2*pi*c_j*r^(2j+1) + ...``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from .families import FamilyKind, SystemFamily
from .poly import MultiPoly, exact_divide, parse, pseudo_reduce


class SolvabilityError(AssertionError):
    """The homological equation had no solution (internal inconsistency)."""


def _double_factorial(n: int) -> int:
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


@lru_cache(maxsize=None)
def circle_means(k: int) -> tuple[Fraction, ...]:
    """Average over the unit circle of x^(k-i) y^i, i = 0..k."""
    out = []
    for i in range(k + 1):
        a, b = k - i, i
        if a % 2 or b % 2:
            out.append(Fraction(0))
        else:
            out.append(Fraction(_double_factorial(a - 1) * _double_factorial(b - 1), _double_factorial(a + b)))
    return tuple(out)


@lru_cache(maxsize=None)
def radial_power(k: int) -> tuple[Fraction, ...]:
    """Coefficients of (x^2 + y^2)^(k/2) for even k."""
    half = k // 2
    out = [Fraction(0)] * (k + 1)
    binom = 1
    for i in range(half + 1):
        out[2 * i] = Fraction(binom)
        binom = binom * (half - i) // (i + 1)
    return tuple(out)


def _rotation_matrix(k: int) -> list[list[Fraction]]:
    # column i = L applied to x^(k-i) y^i
    m = [[Fraction(0)] * (k + 1) for _ in range(k + 1)]
    for i in range(k + 1):
        a, b = k - i, i
        if b:
            m[i - 1][i] += b  # x * d/dy -> x^(a+1) y^(b-1)
        if a:
            m[i + 1][i] -= a  # -y * d/dx -> x^(a-1) y^(b+1)
    return m


def _invert(m: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(m)
    aug = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise SolvabilityError("singular rotation system")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


@lru_cache(maxsize=None)
def rotation_inverse(k: int) -> tuple[tuple[Fraction, ...], ...]:
    """Right inverse of L on degree-k forms.

    For even k the kernel (x^2+y^2)^(k/2) is removed by adding the rank-one
    term ``u w^T`` (u the radial form, w the circle-mean functional); the
    result maps zero-mean forms to the zero-mean preimage.
    """
    m = _rotation_matrix(k)
    if k % 2 == 0:
        u, w = radial_power(k), circle_means(k)
        m = [[m[i][j] + u[i] * w[j] for j in range(k + 1)] for i in range(k + 1)]
    return tuple(tuple(row) for row in _invert(m))


Form = list  # list[MultiPoly], coefficient of x^(k-i) y^i at index i


def _form_dx(f: Form) -> Form:
    k = len(f) - 1
    return [f[i].scale(k - i) for i in range(k)]


def _form_dy(f: Form) -> Form:
    return [f[i].scale(i) for i in range(1, len(f))]


def _form_mul_acc(acc: Form, a: Form, b: Form):
    for i, ca in enumerate(a):
        if ca.is_zero():
            continue
        for j, cb in enumerate(b):
            if cb.is_zero():
                continue
            acc[i + j] = acc[i + j] + ca * cb


def raw_focal_values(fam: SystemFamily, count: int) -> list[MultiPoly]:
    """Raw obstructions c_1..c_(count-1) with the trace parameter set to 0."""
    if count < 1:
        raise ValueError("count must be at least 1")
    f0 = fam.with_trace_zero()
    px = f0.homogeneous_parts(f0.rhs_x)
    py = f0.homogeneous_parts(f0.rhs_y)
    zero = MultiPoly.zero(fam.params)
    one = MultiPoly.const(fam.params, 1)
    top = 2 * count  # highest degree of F needed
    forms: dict[int, Form] = {2: [one.scale(Fraction(1, 2)), zero, one.scale(Fraction(1, 2))]}
    grads: dict[int, tuple[Form, Form]] = {2: (_form_dx(forms[2]), _form_dy(forms[2]))}
    raws: list[MultiPoly] = []
    for k in range(3, top + 1):
        rem: Form = [zero] * (k + 1)
        for m in range(2, k):
            n = k - m + 1
            if n < 2 or m not in grads:
                continue
            fx, fy = grads[m]
            if n in px:
                _form_mul_acc(rem, fx, px[n])
            if n in py:
                _form_mul_acc(rem, fy, py[n])
        if k % 2 == 0:
            w = circle_means(k)
            c = zero
            for wi, ri in zip(w, rem):
                if wi:
                    c = c + ri.scale(wi)
            raws.append(c)
            if k == top:
                break
            u = radial_power(k)
            target = [(c.scale(ui) if ui else zero) - ri for ui, ri in zip(u, rem)]
        else:
            target = [-ri for ri in rem]
        if all(t.is_zero() for t in target):
            continue
        inv = rotation_inverse(k)
        fk = []
        for row in inv:
            acc = zero
            for g, t in zip(row, target):
                if g and not t.is_zero():
                    acc = acc + t.scale(g)
            fk.append(acc)
        forms[k] = fk
        grads[k] = (_form_dx(fk), _form_dy(fk))
    if fam.trace_param is not None:
        i = fam.params.index(fam.trace_param)
        for r in raws:
            if any(e[i] for e in r.terms):
                raise SolvabilityError("focal value depends on the trace parameter")
    return raws


# ---------------------------------------------------------------------------


@dataclass
class NormalizationStep:
    index: int  # j in v_(2j+1)
    raw: MultiPoly
    content: Fraction
    reduced: MultiPoly
    note: str = ""


@dataclass
class FocalValues:
    """v_1, v_3, ..., v_(2N+1) as parameter polynomials.

    ``factors[j]`` is the nonzero rational (positive in the normalized form,
    signed after alignment to reference expressions) with
    ``raw_j == factors[j] * values[j]`` modulo the earlier values, so the
    displacement map starts ``2*pi*factors[j]*values[j](lam) h^(2j+1)``
    whenever the earlier values vanish.  ``factors[0]`` is the factor of v_1
    itself in the linear-part convention (``d = (exp(2 pi t) - 1) h``).
    """

    family: SystemFamily
    values: list[MultiPoly]
    factors: list[Fraction]
    log: list[NormalizationStep] = field(default_factory=list)
    representation: str = "reduced"

    @property
    def N(self) -> int:
        return len(self.values) - 1

    def to_json(self) -> dict:
        return {
            "family": self.family.kind.value,
            "params": list(self.family.params),
            "representation": self.representation,
            "values": [
                {"name": f"v{2 * j + 1}", "poly": str(v), "factor": str(f)}
                for j, (v, f) in enumerate(zip(self.values, self.factors))
            ],
            "normalization": [
                {
                    "name": f"v{2 * s.index + 1}",
                    "raw": str(s.raw),
                    "content_removed": str(s.content),
                    "reduced": str(s.reduced),
                    "note": s.note,
                }
                for s in self.log
            ],
        }


def focal_values(fam: SystemFamily, count: int) -> FocalValues:
    """Normalized focal values [v_1, ..., v_(2 count - 1)].

    Each raw value is divided by its positive content and reduced modulo the
    earlier normalized values.
    """
    raws = raw_focal_values(fam, count)
    params = fam.params
    if fam.trace_param is not None:
        v1 = MultiPoly.var(params, fam.trace_param)
    else:
        v1 = MultiPoly.zero(params)
    values = [v1]
    factors = [Fraction(1)]
    log: list[NormalizationStep] = []
    for j, raw in enumerate(raws, start=1):
        content = raw.content()
        prim = raw.scale(1 / content) if not raw.is_zero() else raw
        earlier = [v for v in values[1:] if not v.is_zero()]
        red = pseudo_reduce(prim, earlier)
        if red.is_zero():
            note = "vanishes modulo earlier values"
            norm, factor = red, Fraction(1)
        else:
            c2 = red.content()
            norm, factor = red.scale(1 / c2), content * c2
            note = "" if c2 == 1 else f"reduced remainder content {c2} removed"
        log.append(NormalizationStep(j, raw, content, red, note))
        values.append(norm)
        factors.append(factor)
    return FocalValues(fam, values, factors, log)


def center_variety_check(
    fam: SystemFamily,
    vals: FocalValues,
    condition: Mapping[str, MultiPoly | int | Fraction | str] | Sequence[Mapping[str, object]],
) -> bool:
    """True iff every focal value vanishes identically under the substitution.

    Images may be numbers, polynomial text or MultiPoly and may introduce new
    symbols (a parametrization of the condition).  `condition` may be a list
    of substitutions, meaning a union of branches; all branches must
    annihilate every value.
    """
    branches = [condition] if isinstance(condition, Mapping) else list(condition)
    for sub in branches:
        images = {k: parse(v) if isinstance(v, str) else v for k, v in sub.items()}
        ring = list(fam.params)
        for img in images.values():
            if isinstance(img, MultiPoly):
                ring += [n for n in img.used_vars() if n not in ring]
        for v in vals.values:
            if not v.subs(images, ring).is_zero():
                return False
    return True


# Center conditions of the built-in families.  Quadric conditions are given
# by polynomial parametrizations in fresh symbols (s, t or u, w).
CENTER_CONDITIONS: dict[str, dict[str, dict[str, str]]] = {
    "bautin": {
        "lotka-volterra": {"l1": "0", "l3": "l6"},
        "symmetric": {"l1": "0", "l2": "0", "l5": "0"},
        "hamiltonian": {"l1": "0", "l4": "0", "l5": "0"},
        # l3*l6 - 2*l6^2 - l2^2 = 0 through l6 = s, l2 = s*t
        "darboux": {"l1": "0", "l5": "0", "l6": "s", "l2": "s*t", "l3": "s*(2 + t^2)",
                    "l4": "-5*s*(1 + t^2)"},
    },
    "sibirsky": {
        "hamiltonian": {"lam": "0", "xi": "0", "a": "0"},
        "symmetric": {"lam": "0", "xi": "0", "nu": "0", "theta": "0"},
        # 4*(mu^2 + theta^2) = a^2 through a Pythagorean triple in u, w
        "darboux": {"lam": "0", "xi": "0", "nu": "0", "omega": "0", "eta": "0",
                    "mu": "u^2 - w^2", "theta": "2*u*w", "a": "2*(u^2 + w^2)"},
    },
}


# ---------------------------------------------------------------------------
# comparison against reference expressions


@dataclass
class Alignment:
    index: int
    factor: Fraction | None
    method: str  # "exact", "sampled", "failed"
    detail: str = ""


def _ideal_zero(p: MultiPoly, earlier: list[MultiPoly]) -> bool:
    return pseudo_reduce(p, earlier).is_zero()


def align_to_reference(
    vals: FocalValues,
    reference: Sequence[MultiPoly],
    sampler=None,
    samples: int = 200,
    seed: int = 0,
) -> tuple[FocalValues, list[Alignment]]:
    """Re-express focal values as rational multiples of reference expressions.

    For each j >= 1 the factor c with ``raw_j == c * ref_j`` modulo the earlier
    references is found and certified exactly by reduction, or, when division
    cannot certify membership, by sampling points of the zero set of the
    earlier references (``sampler(j, rng)`` returns such a rational point).
    The returned FocalValues stores the references themselves.
    """
    raws = [s.raw for s in vals.log]
    refs = [r.to_vars(vals.family.params) for r in reference]
    if len(refs) != len(vals.values):
        raise ValueError("reference list length differs from focal value count")
    report: list[Alignment] = []
    if vals.values[0] != refs[0]:
        report.append(Alignment(0, None, "failed", "v1 differs from reference"))
    else:
        report.append(Alignment(0, Fraction(1), "exact"))
    factors = [Fraction(1)]
    rng = random.Random(seed)
    for j in range(1, len(refs)):
        raw, ref = raws[j - 1], refs[j]
        earlier = [r for r in refs[1:j] if not r.is_zero()]
        if ref.is_zero():
            ok = _ideal_zero(raw, earlier)
            report.append(Alignment(j, Fraction(1) if ok else None, "exact" if ok else "failed"))
            factors.append(Fraction(1))
            continue
        rr = pseudo_reduce(raw, earlier)
        fr = pseudo_reduce(ref, earlier)
        factor = None
        if not rr.is_zero() and not fr.is_zero():
            e, c = fr.leading_term()
            c2 = rr.terms.get(e)
            if c2 is not None:
                factor = c2 / c
        if factor is not None and _ideal_zero(raw - ref.scale(factor), earlier):
            report.append(Alignment(j, factor, "exact"))
        elif sampler is not None:
            factor, detail = _sampled_factor(raw, ref, earlier, j, sampler, samples, rng)
            report.append(Alignment(j, factor, "sampled" if factor is not None else "failed", detail))
        else:
            report.append(Alignment(j, None, "failed", "reduction did not certify and no sampler"))
            factor = None
        factors.append(factor if factor is not None else Fraction(0))
    aligned = FocalValues(vals.family, list(refs), factors, vals.log, representation="reference")
    return aligned, report


def _sampled_factor(raw, ref, earlier, j, sampler, samples, rng):
    ratio = None
    for _ in range(samples):
        pt = sampler(j, rng)
        if any(e.eval(pt) != 0 for e in earlier):
            return None, "sampler produced a point off the earlier zero set"
        a, b = raw.eval(pt), ref.eval(pt)
        if (a == 0) != (b == 0):
            return None, f"zero sets differ at {pt}"
        if b != 0:
            q = a / b
            if ratio is None:
                ratio = q
            elif q != ratio:
                return None, f"ratio not constant ({ratio} vs {q})"
    return ratio, f"constant ratio on {samples} sampled points"


def quadratic_reference() -> list[MultiPoly]:
    params = ("l1", "l2", "l3", "l4", "l5", "l6")
    return [
        parse("l1", params),
        parse("l5*(l3 - l6)", params),
        parse("l2*l4*(l3 - l6)*(l4 + 5*l3 - 5*l6)", params),
        parse("l2*l4*(l3 - l6)^2*(l3*l6 - 2*l6^2 - l2^2)", params),
    ]


def cubic_reference() -> list[MultiPoly]:
    params = ("lam", "omega", "theta", "a", "eta", "mu", "xi", "nu")
    return [
        parse("lam", params),
        parse("xi", params),
        parse("nu*a", params),
        parse("omega*theta*a", params),
        parse("theta*a^2*eta", params),
        parse("theta*(4*(mu^2 + theta^2) - a^2)*a^2", params),
    ]


def reference_values(fam: SystemFamily) -> list[MultiPoly] | None:
    if fam.kind is FamilyKind.QUADRATIC:
        return quadratic_reference()
    if fam.kind is FamilyKind.CUBIC:
        return cubic_reference()
    return None


def divide_out(p: MultiPoly, d: MultiPoly) -> MultiPoly | None:
    return exact_divide(p, d)
