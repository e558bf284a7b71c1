"""Planar vector fields with numeric coefficients, orbit integration and the
return map to the positive x-axis."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from ..poly import MultiPoly
from .expr import Expr


class NumericError(RuntimeError):
    """Base class for failures of the numerical pipeline."""


class EscapeError(NumericError):
    pass


class StiffnessError(NumericError):
    pass


class NonReturnError(NumericError):
    pass


class CapabilityError(NumericError):
    pass


class TracingError(NumericError):
    pass


class FlowSpecError(ValueError):
    pass


@dataclass(frozen=True)
class Tolerances:
    # plain orbit integration
    rtol: float = 1e-10
    atol: float = 1e-12
    # return maps feed finite differences in eps, so they run tighter
    map_rtol: float = 1e-13
    map_atol: float = 1e-15
    event_tol: float = 1e-12
    max_time: float = 1e3
    # right-hand-side evaluations per polar integration; orbits that creep
    # into an equilibrium otherwise never finish
    max_evals: float = 2e5

    @classmethod
    def from_mapping(cls, data: dict) -> "Tolerances":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown tolerance keys: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})


DEFAULT_TOL = Tolerances()


def compile_poly(p: MultiPoly, names: tuple[str, ...]):
    """Float evaluator for a polynomial with the given argument order."""
    p = p.to_vars(names)
    parts = []
    for e, c in p.terms.items():
        factors = [repr(float(c))]
        for n, k in zip(names, e):
            if k == 1:
                factors.append(n)
            elif k > 1:
                factors.append(f"{n}**{k}")
        parts.append("*".join(factors))
    body = " + ".join(parts) if parts else "0.0"
    return eval(f"lambda {', '.join(names)}: {body}", {"__builtins__": {}})


class FlowSpec:
    """``x' = rhs_x, y' = rhs_y`` over x, y and optionally a small parameter.

    The unperturbed field (parameter 0) must have the origin as an
    equilibrium with linear part ``-y + t x, x + t y``.  H and V are optional
    closed-form first integral and inverse integrating factor of the
    unperturbed field.
    """

    def __init__(self, rhs_x: MultiPoly, rhs_y: MultiPoly, H: str | Expr | None = None,
                 V: str | Expr | None = None, eps: str = "eps", bound: float = 1e3,
                 check_points: int = 24, seed: int = 0):
        self.eps = eps
        self.names = ("x", "y", eps)
        for p in (rhs_x, rhs_y):
            extra = set(p.used_vars()) - set(self.names)
            if extra:
                raise FlowSpecError(f"unbound parameters in vector field: {sorted(extra)}")
        self.rhs_x = rhs_x.to_vars(self.names)
        self.rhs_y = rhs_y.to_vars(self.names)
        self.H = Expr(H) if isinstance(H, str) else H
        self.V = Expr(V) if isinstance(V, str) else V
        self.bound = bound
        self._fx = compile_poly(self.rhs_x, self.names)
        self._fy = compile_poly(self.rhs_y, self.names)
        self._jac = [compile_poly(f.diff(v), self.names) for f in (self.rhs_x, self.rhs_y) for v in ("x", "y")]
        self._validate_linear_part()
        if self.H is not None:
            self._validate_first_integral(check_points, seed)

    def _validate_linear_part(self):
        if self.f(0.0, 0.0, 0.0) != (0.0, 0.0):
            raise FlowSpecError("origin is not an equilibrium of the unperturbed field")
        a, b, c, d = (j(0.0, 0.0, 0.0) for j in self._jac)
        if not (b == -1.0 and c == 1.0 and a == d):
            raise FlowSpecError(f"linear part must be [[t,-1],[1,t]], got [[{a},{b}],[{c},{d}]]")

    def _validate_first_integral(self, n: int, seed: int):
        rng = random.Random(seed)
        for _ in range(n):
            r = rng.uniform(0.02, 0.3)
            th = rng.uniform(0, 2 * math.pi)
            x, y = r * math.cos(th), r * math.sin(th)
            fx, fy = self.f(x, y, 0.0)
            gx, gy = self.H.gradient(x, y)
            lhs = gx * fx + gy * fy
            scale = math.hypot(gx, gy) * math.hypot(fx, fy)
            if abs(lhs) > 1e-10 * max(scale, 1e-300):
                raise FlowSpecError(f"H is not conserved by the unperturbed field at ({x:.3g}, {y:.3g})")

    def f(self, x, y, eps=0.0):
        return self._fx(x, y, eps), self._fy(x, y, eps)

    def jacobian(self, x, y, eps=0.0):
        return tuple(j(x, y, eps) for j in self._jac)

    def at_eps_zero(self) -> "FlowSpec":
        sub = {self.eps: MultiPoly.const((), 0)}
        return FlowSpec(self.rhs_x.subs(sub, ("x", "y")), self.rhs_y.subs(sub, ("x", "y")),
                        self.H, self.V, self.eps, self.bound, check_points=0)

    def h_of_x(self, x0: float) -> float:
        return float(self.H(x0, 0.0)) if self.H is not None else x0

    def x_of_h(self, h: float, x_max: float | None = None) -> float:
        """x-intercept on the positive x-axis of the level H = h."""
        if self.H is None:
            return h
        hi = x_max or 1.0
        g = lambda x: float(self.H(x, 0.0)) - h
        while g(hi) < 0:
            hi *= 2
            if hi > self.bound:
                raise TracingError(f"level H = {h} does not meet the positive x-axis")
        return brentq(g, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


@dataclass
class Trajectory:
    t: np.ndarray
    xy: np.ndarray
    crossing: tuple[float, float] | None = None
    period: float | None = None
    status: str = "ok"
    max_h_drift: float | None = None


def integrate_orbit(flow: FlowSpec, start: tuple[float, float], stop: float | str = "return",
                    eps: float = 0.0, tol: Tolerances = DEFAULT_TOL) -> Trajectory:
    """Integrate in time until ``stop`` (a time) or until the first return to
    the positive x-axis (``stop="return"``)."""

    def rhs(t, u):
        return flow.f(u[0], u[1], eps)

    def escape(t, u):
        return flow.bound - math.hypot(u[0], u[1])

    escape.terminal = True

    def run(t0, u0, t1, events):
        sol = solve_ivp(rhs, (t0, t1), u0, method="DOP853", rtol=tol.rtol, atol=tol.atol,
                        events=[escape] + events, dense_output=False)
        if sol.status == -1:
            raise StiffnessError(sol.message)
        if sol.t_events[0].size:
            raise EscapeError(f"orbit left the ball of radius {flow.bound}")
        return sol

    u0 = np.array(start, dtype=float)
    if stop != "return":
        sol = run(0.0, u0, float(stop), [])
        return Trajectory(sol.t, sol.y, status="ok")

    # two phases so the start point itself never counts as a crossing
    def lower(t, u):
        return u[1] if u[0] < 0 else 1.0

    lower.terminal = True
    lower.direction = -1

    def upper(t, u):
        return u[1] if u[0] > 0 else -1.0

    upper.terminal = True
    upper.direction = 1

    s1 = run(0.0, u0, tol.max_time, [lower])
    if not s1.t_events[1].size:
        raise NonReturnError("orbit did not reach the negative x-axis within the time bound")
    t1, u1 = s1.t_events[1][0], s1.y_events[1][0]
    s2 = run(t1, u1, t1 + tol.max_time, [upper])
    if not s2.t_events[1].size:
        raise NonReturnError("orbit did not return to the positive x-axis within the time bound")
    t2, u2 = s2.t_events[1][0], s2.y_events[1][0]
    t = np.concatenate((s1.t, s2.t[1:]))
    xy = np.concatenate((s1.y, s2.y[:, 1:]), axis=1)
    drift = None
    if flow.H is not None and eps == 0.0:
        hs = flow.H(xy[0], xy[1])
        drift = float(np.max(np.abs(hs - hs[0])))
    return Trajectory(t, xy, (float(u2[0]), float(u2[1])), float(t2), "ok", drift)


class _NotRotating(Exception):
    pass


def _counted(rhs, tol: Tolerances):
    calls = 0

    def wrapped(th, u):
        nonlocal calls
        calls += 1
        if calls > tol.max_evals:
            raise StiffnessError(f"polar integration stalled at angle {th:.6g} (evaluation budget spent)")
        return rhs(th, u)

    return wrapped


def _polar_parts(flow: FlowSpec, r: float, th: float, eps: float):
    c, s = math.cos(th), math.sin(th)
    x, y = r * c, r * s
    fx, fy = flow.f(x, y, eps)
    num = c * fx + s * fy  # r'
    den = c * fy - s * fx  # r * theta'
    if den <= 0.0:
        raise _NotRotating(f"angular velocity is not positive at ({x:.4g}, {y:.4g})")
    return c, s, x, y, fx, fy, num, den


def return_map(flow: FlowSpec, x0: float, eps: float = 0.0, derivative: bool = False,
               tol: Tolerances = DEFAULT_TOL):
    """First return of the positive x-axis to itself, integrated in the polar
    angle.  With ``derivative`` also returns dP/dx0 from the variational
    equation."""
    if x0 <= 0:
        raise ValueError("start point must lie on the positive x-axis")

    def rhs(th, u):
        r = u[0]
        if r <= 0 or r > flow.bound:
            raise EscapeError(f"orbit left the annulus (r = {r:.4g})")
        c, s, x, y, fx, fy, num, den = _polar_parts(flow, r, th, eps)
        drdth = r * num / den
        if not derivative:
            return [drdth]
        ax, bx, ay, by = flow.jacobian(x, y, eps)
        # radial derivatives of the numerator and denominator
        dfx = ax * c + bx * s
        dfy = ay * c + by * s
        dnum = c * dfx + s * dfy
        dden = c * dfy - s * dfx
        dF = num / den + r * (dnum * den - num * dden) / den**2
        return [drdth, dF * u[1]]

    u0 = [x0, 1.0] if derivative else [x0]
    try:
        sol = solve_ivp(_counted(rhs, tol), (0.0, 2 * math.pi), u0, method="DOP853",
                        rtol=tol.map_rtol, atol=tol.map_atol)
    except _NotRotating as exc:
        raise NonReturnError(f"no polar return map: {exc}") from None
    if not sol.success:
        raise StiffnessError(sol.message)
    end = sol.y[:, -1]
    if derivative:
        return float(end[0]), float(end[1])
    return float(end[0])


def displacement(flow: FlowSpec, x0: float, eps: float, in_h: bool = False,
                 tol: Tolerances = DEFAULT_TOL) -> float:
    """Return position minus start position on the positive x-axis; in
    H-units when requested and H is available."""
    x1 = return_map(flow, x0, eps, tol=tol)
    if in_h and flow.H is not None:
        return flow.h_of_x(x1) - flow.h_of_x(x0)
    return x1 - x0


def m1_line_integral(flow: FlowSpec, p: MultiPoly, q: MultiPoly, h: float,
                     tol: Tolerances = DEFAULT_TOL) -> float:
    """First Melnikov function as the integral of (p dy - q dx) / V around
    the level H = h of the unperturbed field.

    Orientation: counterclockwise, so the linear center with (p, q) = (x, y)
    and V = sqrt(x^2 + y^2) gives +2 pi h, the slope of its displacement.
    """
    if flow.H is None or flow.V is None:
        raise CapabilityError("line integral needs both H and V")
    pf = compile_poly(p.to_vars(("x", "y")), ("x", "y"))
    qf = compile_poly(q.to_vars(("x", "y")), ("x", "y"))
    x0 = flow.x_of_h(h)

    def rhs(th, u):
        r = u[0]
        c, s, x, y, fx, fy, num, den = _polar_parts(flow, r, th, 0.0)
        dt = r / den  # dt / dtheta
        integrand = (pf(x, y) * fy - qf(x, y) * fx) / float(flow.V(x, y))
        return [r * num / den, integrand * dt]

    try:
        sol = solve_ivp(_counted(rhs, tol), (0.0, 2 * math.pi), [x0, 0.0], method="DOP853",
                        rtol=tol.map_rtol, atol=tol.map_atol)
    except _NotRotating as exc:
        raise TracingError(f"level orbit cannot be traced in the polar angle: {exc}") from None
    if not sol.success:
        raise StiffnessError(sol.message)
    r_end, value = sol.y[:, -1]
    if abs(r_end - x0) > 1e-8 * max(x0, 1.0):
        raise TracingError(f"level orbit H = {h} does not close (gap {r_end - x0:.3g})")
    return float(value)
