"""Zeros of sampled Melnikov functions, with multiplicities."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq, minimize_scalar

from .melnikov import MelnikovCurve, Zero

QUAD_TOL = 1e-12


def _local_coeffs(f: Callable[[float], float], h0: float, w: float, degree: int = 4) -> np.ndarray:
    """Least-squares Taylor coefficients of f around h0 on [h0 - w, h0 + w]."""
    t = np.linspace(-w, w, 2 * degree + 3)
    vals = np.array([f(h0 + s) for s in t])
    A = np.vstack([t**i for i in range(degree + 1)]).T
    c, *_ = np.linalg.lstsq(A, vals, rcond=None)
    return c


def _multiplicity(f, h0, w, floor, even: bool) -> int:
    c = _local_coeffs(f, h0, w)
    start = 2 if even else 1
    for r in range(start, len(c)):
        if even and r % 2:
            continue
        if abs(c[r]) * w**r > floor:
            return r
    return len(c)


def find_zeros(curve: MelnikovCurve | tuple[Sequence[float], Sequence[float]],
               evaluator: Callable[[float], float] | None = None, quad_tol: float = QUAD_TOL) -> list[Zero]:
    """Zeros strictly inside the sampled interval.

    Sign changes are refined by Brent's method; same-sign dips are examined by
    minimising |M| between the neighbours, which either finds a touch (even
    multiplicity) or a pair of close crossings.  The noise floor is
    ``1e3 * quad_tol`` relative to the largest sampled |M|.
    """
    if isinstance(curve, MelnikovCurve):
        hs, ms = curve.hs, curve.values
        evaluator = evaluator or curve.evaluator
    else:
        hs, ms = np.asarray(curve[0], float), np.asarray(curve[1], float)
    if evaluator is None:
        evaluator = CubicSpline(hs, ms)
    f = lambda h: float(evaluator(h))
    scale = max(float(np.max(np.abs(ms))), 1e-300)
    floor = 1e3 * quad_tol * max(scale, 1.0)
    width = hs[-1] - hs[0]
    found: list[tuple[float, str]] = []

    def add(h, kind):
        if all(abs(h - g) > 1e-9 * width for g, _ in found):
            found.append((h, kind))

    n = len(hs)
    for i in range(n):
        if abs(ms[i]) <= floor:
            left = ms[i - 1] if i > 0 else None
            right = ms[i + 1] if i + 1 < n else None
            if left is not None and right is not None:
                add(hs[i], "crossing" if left * right < 0 else "touch")
            else:
                add(hs[i], "boundary")
    for i in range(n - 1):
        a, b = ms[i], ms[i + 1]
        if abs(a) > floor and abs(b) > floor and a * b < 0:
            add(brentq(f, hs[i], hs[i + 1], xtol=1e-14, rtol=1e-14), "crossing")
    for i in range(1, n - 1):
        a, m, b = ms[i - 1], ms[i], ms[i + 1]
        if min(abs(a), abs(m), abs(b)) <= floor or not (a * m > 0 and m * b > 0):
            continue
        if not (abs(m) < abs(a) and abs(m) <= abs(b)):
            continue
        s = np.sign(m)
        res = minimize_scalar(lambda h: s * f(h), bounds=(hs[i - 1], hs[i + 1]), method="bounded",
                              options={"xatol": 1e-12})
        if res.fun <= floor and res.fun >= -floor:
            add(float(res.x), "touch")
        elif res.fun < 0:
            add(brentq(f, hs[i - 1], res.x, xtol=1e-14, rtol=1e-14), "crossing")
            add(brentq(f, res.x, hs[i + 1], xtol=1e-14, rtol=1e-14), "crossing")

    zeros = []
    found.sort()
    for k, (h, kind) in enumerate(found):
        gaps = [h - hs[0], hs[-1] - h]
        if k > 0:
            gaps.append((h - found[k - 1][0]) / 2)
        if k + 1 < len(found):
            gaps.append((found[k + 1][0] - h) / 2)
        w = min(1e-2 * width, *[g for g in gaps if g > 0]) if any(g > 0 for g in gaps) else 1e-2 * width
        warning = ""
        if kind == "boundary":
            warning = "zero at grid boundary (annulus edge)"
            mult = 1
        else:
            lo, hi = max(hs[0], h - w), min(hs[-1], h + w)
            w = min(h - lo, hi - h) or w
            mult = _multiplicity(f, h, w, floor, even=(kind == "touch"))
        zeros.append(Zero(float(h), mult, abs(f(h)), "touch" if kind == "touch" else "crossing", warning))
    if isinstance(curve, MelnikovCurve):
        curve.zeros = zeros
    return zeros


def zero_count(zeros: list[Zero]) -> int:
    """Number of zeros counted with multiplicity."""
    return sum(z.multiplicity for z in zeros)
