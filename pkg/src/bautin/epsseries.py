"""Expansion of focal values along parameter curves lam(eps).

Each family parameter ``p`` follows a truncated power series
``p(eps) = sum_l p_l eps^l``.  Series coefficients are polynomials over a
common ring of symbols; by default the coefficient of ``eps^l`` is the symbol
``f"{p}_{l}"`` (so ``l3_1`` for the quadratic parameter ``l3``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .liapunov import FocalValues
from .poly import MultiPoly, VariableMismatch, parse

DEFAULT_R_MAX = 8


def coeff_symbol(param: str, ell: int) -> str:
    return f"{param}_{ell}"


def _sort_symbols(names: Iterable[str], params: Sequence[str]) -> tuple[str, ...]:
    order = {p: i for i, p in enumerate(params)}

    def key(name):
        base, _, ell = name.rpartition("_")
        if base in order and ell.isdigit():
            return (0, order[base], int(ell), name)
        return (1, 0, 0, name)

    return tuple(sorted(set(names), key=key))


class ParamSeries:
    """Truncated series for every parameter of a family.

    ``coeffs[p][l]`` is a MultiPoly over ``ring`` for ``l = 0..r_max``.  With
    ``tail="symbolic"`` coefficients beyond ``r_max`` are the free symbols
    ``p_l``; with ``tail="zero"`` they vanish.
    """

    def __init__(
        self,
        params: Sequence[str],
        coeffs: Mapping[str, Sequence[MultiPoly]],
        ring: Sequence[str],
        r_max: int,
        tail: str = "zero",
    ):
        if tail not in ("zero", "symbolic"):
            raise ValueError("tail must be 'zero' or 'symbolic'")
        self.params = tuple(params)
        self.r_max = r_max
        self.tail = tail
        missing = [p for p in self.params if p not in coeffs]
        extra = [p for p in coeffs if p not in self.params]
        if missing or extra:
            raise VariableMismatch(f"series must cover exactly {self.params}; missing {missing}, extra {extra}")
        ring = tuple(ring)
        self.coeffs: dict[str, list[MultiPoly]] = {}
        for p in self.params:
            lst = list(coeffs[p])
            if len(lst) != r_max + 1:
                raise ValueError(f"series for {p} has {len(lst)} coefficients, expected {r_max + 1}")
            self.coeffs[p] = [c.to_vars(ring) for c in lst]
        self.ring = ring

    # construction -----------------------------------------------------------

    @classmethod
    def symbolic(cls, params: Sequence[str], r_max: int, tail: str = "symbolic") -> "ParamSeries":
        names = [coeff_symbol(p, l) for p in params for l in range(r_max + 1)]
        ring = _sort_symbols(names, params)
        coeffs = {p: [MultiPoly.var(ring, coeff_symbol(p, l)) for l in range(r_max + 1)] for p in params}
        return cls(params, coeffs, ring, r_max, tail)

    @classmethod
    def from_table(
        cls,
        params: Sequence[str],
        table: Mapping[str, Mapping[int, object]],
        r_max: int,
        tail: str = "zero",
        extra_symbols: Sequence[str] = (),
    ) -> "ParamSeries":
        """Build from ``{param: {ell: value}}``; values are rationals, ``"p/q"``
        strings, polynomial text or MultiPoly.  Unlisted coefficients are 0
        (``tail="zero"``) or their own symbol (``tail="symbolic"``)."""
        params = tuple(params)
        unknown = [p for p in table if p not in params]
        if unknown:
            raise VariableMismatch(f"unknown parameters {unknown}")
        texts: dict[tuple[str, int], object] = {}
        names: set[str] = set(extra_symbols)
        for p, row in table.items():
            for ell, val in row.items():
                ell = int(ell)
                if ell < 0 or ell > r_max:
                    raise ValueError(f"coefficient index {ell} for {p} outside 0..{r_max}")
                texts[(p, ell)] = val
                if isinstance(val, str):
                    names.update(parse(val).vars)
                elif isinstance(val, MultiPoly):
                    names.update(val.used_vars())
        if tail == "symbolic":
            names.update(coeff_symbol(p, l) for p in params for l in range(r_max + 1) if (p, l) not in texts)
        ring = _sort_symbols(names, params)
        coeffs = {}
        for p in params:
            lst = []
            for l in range(r_max + 1):
                if (p, l) in texts:
                    lst.append(_as_poly(texts[(p, l)], ring))
                elif tail == "symbolic":
                    lst.append(MultiPoly.var(ring, coeff_symbol(p, l)))
                else:
                    lst.append(MultiPoly.zero(ring))
            coeffs[p] = lst
        return cls(params, coeffs, ring, r_max, tail)

    @classmethod
    def from_param_polys(
        cls, params: Sequence[str], values: Mapping[str, MultiPoly], eps: str = "eps", r_max: int | None = None
    ) -> "ParamSeries":
        """Series from parameter values that are polynomials in ``eps`` and other symbols."""
        ring_all = next(iter(values.values())).vars
        if eps not in ring_all:
            raise VariableMismatch(f"{eps!r} not declared")
        i = ring_all.index(eps)
        top = max((v.degree_in(eps) for v in values.values()), default=0)
        r_max = max(top, 0) if r_max is None else r_max
        if top > r_max:
            raise ValueError(f"series degree {top} exceeds r_max {r_max}")
        ring = tuple(v for v in ring_all if v != eps)
        coeffs = {}
        for p in params:
            lst = [dict() for _ in range(r_max + 1)]
            for e, c in values[p].terms.items():
                lst[e[i]][e[:i] + e[i + 1:]] = c
            coeffs[p] = [MultiPoly(ring, d) for d in lst]
        return cls(params, coeffs, ring, r_max, "zero")

    # queries / transforms -----------------------------------------------------

    def coefficient(self, p: str, ell: int) -> MultiPoly:
        if ell <= self.r_max:
            return self.coeffs[p][ell]
        if self.tail == "zero":
            return MultiPoly.zero(self.ring)
        raise KeyError(ell)

    def extended_ring(self, order: int) -> tuple[str, ...]:
        if self.tail == "zero" or order <= self.r_max:
            return self.ring
        names = list(self.ring) + [coeff_symbol(p, l) for p in self.params for l in range(self.r_max + 1, order + 1)]
        return _sort_symbols(names, self.params)

    def series_of(self, p: str, order: int, ring: tuple[str, ...]) -> list[MultiPoly]:
        out = []
        for l in range(order + 1):
            if l <= self.r_max:
                out.append(self.coeffs[p][l].to_vars(ring))
            elif self.tail == "symbolic":
                out.append(MultiPoly.var(ring, coeff_symbol(p, l)))
            else:
                out.append(MultiPoly.zero(ring))
        return out

    def subs(self, mapping: Mapping[str, object], ring: Sequence[str] | None = None) -> "ParamSeries":
        """Substitute symbols inside every coefficient (e.g. impose hypotheses)."""
        if ring is None:
            names = [v for v in self.ring if v not in mapping]
            for img in mapping.values():
                if isinstance(img, MultiPoly):
                    names.extend(img.used_vars())
            ring = _sort_symbols(names, self.params)
        ring = tuple(ring)
        imgs = {k: (_as_poly(v, ring) if not isinstance(v, MultiPoly) else v.to_vars(ring)) for k, v in mapping.items()}
        coeffs = {p: [c.subs(imgs, ring) for c in lst] for p, lst in self.coeffs.items()}
        out = ParamSeries(self.params, coeffs, ring, self.r_max, self.tail)
        return out

    def is_numeric(self) -> bool:
        return self.tail == "zero" and all(c.is_constant() for lst in self.coeffs.values() for c in lst)

    def base_point(self) -> dict[str, MultiPoly]:
        return {p: lst[0] for p, lst in self.coeffs.items()}

    def to_json(self) -> dict:
        return {
            "r_max": self.r_max,
            "tail": self.tail,
            "series": {p: {str(l): str(c) for l, c in enumerate(lst) if not c.is_zero()} for p, lst in self.coeffs.items()},
        }


def _as_poly(val, ring) -> MultiPoly:
    if isinstance(val, MultiPoly):
        return val.to_vars(ring)
    if isinstance(val, (int, Fraction)):
        return MultiPoly.const(ring, val)
    if isinstance(val, str):
        return parse(val).to_vars(ring)
    raise TypeError(f"cannot use {val!r} as a series coefficient")


# ---------------------------------------------------------------------------
# truncated series arithmetic


def _series_mul(a: list[MultiPoly], b: list[MultiPoly], order: int) -> list[MultiPoly]:
    ring = a[0].vars
    out = [MultiPoly.zero(ring) for _ in range(order + 1)]
    for i, ai in enumerate(a):
        if ai.is_zero():
            continue
        for j in range(order + 1 - i):
            if not b[j].is_zero():
                out[i + j] = out[i + j] + ai * b[j]
    return out


def subst_series(p: MultiPoly, s: ParamSeries, order: int) -> list[MultiPoly]:
    """Coefficients of eps^0..eps^order in p(lam(eps))."""
    if order < 0:
        raise ValueError("order must be non-negative")
    bad = [v for v in p.used_vars() if v not in s.params]
    if bad:
        raise VariableMismatch(f"polynomial uses {bad}, not parameters of the series")
    ring = s.extended_ring(order)
    zero = MultiPoly.zero(ring)
    series = {}
    powers: dict[tuple[str, int], list[MultiPoly]] = {}

    def power(name, k):
        key = (name, k)
        if key not in powers:
            if k == 1:
                powers[key] = series.setdefault(name, s.series_of(name, order, ring))
            else:
                half = power(name, k // 2)
                sq = _series_mul(half, half, order)
                powers[key] = sq if k % 2 == 0 else _series_mul(sq, power(name, 1), order)
        return powers[key]

    out = [zero] * (order + 1)
    for exp, c in p.terms.items():
        term = [MultiPoly.const(ring, c)] + [zero] * order
        for name, k in zip(p.vars, exp):
            if k:
                term = _series_mul(term, power(name, k), order)
        out = [o + t for o, t in zip(out, term)]
    return out


# ---------------------------------------------------------------------------


@dataclass
class EpsCoefficients:
    """rows[j][r] = coefficient of eps^r in v_(2j+1)(lam(eps)), r = 0..r_max."""

    family: str
    rows: list[list[MultiPoly]]
    r_max: int
    ring: tuple[str, ...]
    flags: list[str] = field(default_factory=list)

    @property
    def N(self) -> int:
        return len(self.rows) - 1

    def entry(self, j: int, r: int) -> MultiPoly:
        return self.rows[j][r]

    def column(self, r: int) -> list[MultiPoly]:
        return [row[r] for row in self.rows]

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "r_max": self.r_max,
            "rows": [
                {"j": j, "r": r, "poly": str(self.rows[j][r])}
                for r in range(self.r_max + 1)
                for j in range(len(self.rows))
            ],
        }


def expand(vals: FocalValues, s: ParamSeries, r_max: int = DEFAULT_R_MAX) -> EpsCoefficients:
    if r_max < 1:
        raise ValueError("r_max must be at least 1")
    if set(s.params) != set(vals.family.params):
        raise VariableMismatch("series does not declare the family parameters")
    rows = [subst_series(v, s, r_max) for v in vals.values]
    ring = rows[0][0].vars
    rows = [[c.to_vars(ring) for c in row] for row in rows]
    flags = []
    bad0 = [j for j, row in enumerate(rows) if not row[0].is_zero()]
    if bad0:
        flags.append(f"base point is not a center: eps^0 row nonzero for v{', v'.join(str(2 * j + 1) for j in bad0)}")
    return EpsCoefficients(vals.family.kind.value, rows, r_max, ring, flags)


class HypothesisViolation(ValueError):
    def __init__(self, j: int, r: int, value: MultiPoly):
        self.j, self.r, self.value = j, r, value
        super().__init__(f"row r={r} is not zero: coefficient of v{2 * j + 1} is {value}")


FLAT = "flat"


def melnikov_order(tab: EpsCoefficients, bound: Mapping[str, object] | None = None) -> int | str:
    """Smallest r >= 1 with a nonzero row, or ``"flat"`` up to r_max.

    With `bound`, entries are evaluated at that numeric binding of the series
    symbols; otherwise nonzero means nonzero as a polynomial.
    """
    for r in range(0, tab.r_max + 1):
        for row in tab.rows:
            e = row[r]
            nz = (e.eval(bound) != 0) if bound is not None else not e.is_zero()
            if nz:
                return r
    return FLAT


@dataclass
class MelnikovSymbolic:
    order: int
    coeffs: list[MultiPoly]

    def to_json(self) -> dict:
        return {"order": self.order, "coeffs": [str(c) for c in self.coeffs]}


def melnikov_symbolic(tab: EpsCoefficients, k: int) -> MelnikovSymbolic:
    if k < 1 or k > tab.r_max:
        raise ValueError(f"order {k} outside 1..{tab.r_max}")
    for r in range(0, k):
        for j, row in enumerate(tab.rows):
            if not row[r].is_zero():
                raise HypothesisViolation(j, r, row[r])
    return MelnikovSymbolic(k, tab.column(k))
