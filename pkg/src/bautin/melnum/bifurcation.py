"""Locating the limit cycle born from a simple zero of a Melnikov function."""

from __future__ import annotations

from dataclasses import dataclass

from .flow import DEFAULT_TOL, FlowSpec, NumericError, Tolerances, integrate_orbit, return_map


@dataclass
class BifurcationReport:
    h_star: float
    eps: float
    found: bool
    verdict: str
    x_cycle: float | None = None
    h_cycle: float | None = None
    period: float | None = None
    derivative: float | None = None  # of the return map at the cycle
    hyperbolicity: float | None = None  # |derivative - 1|
    stability: str | None = None
    residual: float | None = None
    distance: float | None = None
    C: float | None = None  # distance / eps
    iterations: int = 0

    def to_json(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


def verify_bifurcation(flow: FlowSpec, h_star: float, eps: float, tol: Tolerances = DEFAULT_TOL,
                       max_iter: int = 40, max_distance: float = 0.05,
                       min_hyperbolicity: float = 1e-4) -> BifurcationReport:
    """Newton iteration for a fixed point of the return map near the level
    h_star, using the variational equation for the derivative."""
    x = flow.x_of_h(h_star)
    if eps == 0.0:
        p, dp = return_map(flow, x, 0.0, derivative=True, tol=tol)
        return BifurcationReport(h_star, eps, False,
                                 "center: the unperturbed return map is the identity, no isolated cycle",
                                 residual=abs(p - x), derivative=dp, hyperbolicity=abs(dp - 1))
    target = 10 * (tol.map_rtol * max(x, 1.0) + tol.map_atol)
    it = 0
    try:
        for it in range(1, max_iter + 1):
            p, dp = return_map(flow, x, eps, derivative=True, tol=tol)
            g = p - x
            if abs(g) <= target:
                break
            if dp == 1.0:
                raise NumericError("return-map derivative equals 1")
            step = g / (dp - 1.0)
            x_new = x - step
            if x_new <= 0:
                x_new = x / 2
            x = x_new
        else:
            return BifurcationReport(h_star, eps, False, "not found: Newton did not converge "
                                     "(tolerance or eps too large?)", iterations=it)
    except NumericError as exc:
        return BifurcationReport(h_star, eps, False, f"not found: {exc}", iterations=it)
    h_cycle = flow.h_of_x(x)
    p, dp = return_map(flow, x, eps, derivative=True, tol=tol)
    dist = abs(h_cycle - h_star)
    hyper = abs(dp - 1.0)
    try:
        period = integrate_orbit(flow, (x, 0.0), "return", eps=eps, tol=tol).period
    except NumericError:
        period = None
    ok = dist <= max_distance and hyper >= min_hyperbolicity
    if ok:
        verdict = "hyperbolic limit cycle near h*"
    elif dist > max_distance:
        verdict = f"no cycle near h*: Newton reached a fixed point at distance {dist:.3g}"
    else:
        verdict = f"cycle near h* is not hyperbolic to tolerance (|P'-1| = {hyper:.3g})"
    return BifurcationReport(
        h_star, eps, ok, verdict, x, h_cycle, period, dp, hyper,
        "attracting" if dp < 1 else "repelling", abs(p - x), dist, dist / abs(eps), it,
    )
