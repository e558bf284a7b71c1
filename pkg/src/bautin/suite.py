"""The claim-verification suite: lemma tables, essential plans, range
samples and (optionally) the numeric checks on the example center."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .essential import classify, essential_plan, phi_range_sample, plan_keys, verify_plan
from .families import bautin, by_name
from .lemmas import check_all
from .liapunov import CENTER_CONDITIONS, align_to_reference, center_variety_check, focal_values, reference_values
from .melnum.taylor import oracle_check

FOCAL_COUNT = {"bautin": 4, "sibirsky": 6}

RANGE_SAMPLES = (
    ("Q-GenericDarboux", {"l1": 0, "l2": 1, "l3": 3, "l4": -10, "l5": 0, "l6": 1}, 1),
    ("Q-SymLV", {"l1": 0, "l2": 0, "l3": 1, "l4": 1, "l5": 0, "l6": 1}, 2),
    ("Q-Linear", {"l1": 0, "l2": 0, "l3": 0, "l4": 0, "l5": 0, "l6": 0}, 1),
    ("Q-HamLV", {"l1": 0, "l2": 1, "l3": 1, "l4": 0, "l5": 0, "l6": 1}, 3),
    ("Q-HamLV", {"l1": 0, "l2": 1, "l3": 1, "l4": 0, "l5": 0, "l6": 1}, 4),
    ("Q-HamLV", {"l1": 0, "l2": 1, "l3": 1, "l4": 0, "l5": 0, "l6": 1}, 5),
    ("Q-HamTriangle", {"l1": 0, "l2": 0, "l3": 1, "l4": 0, "l5": 0, "l6": 1}, 1),
    ("Q-HamTriangle", {"l1": 0, "l2": 0, "l3": 1, "l4": 0, "l5": 0, "l6": 1}, 2),
    ("Q-HamTriangle", {"l1": 0, "l2": 0, "l3": 1, "l4": 0, "l5": 0, "l6": 1}, 3),
)


@dataclass
class SuiteRow:
    item: str
    group: str
    status: str  # "pass", "fail" or "recorded"
    detail: str = ""

    def to_json(self) -> dict:
        return {"item": self.item, "group": self.group, "status": self.status, "detail": self.detail}


@dataclass
class SuiteReport:
    rows: list[SuiteRow] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.status != "fail" for r in self.rows)

    def to_json(self) -> dict:
        return {"passed": self.passed, "matrix": [r.to_json() for r in self.rows], "details": self.details}

    def to_text(self) -> str:
        w = max((len(r.item) for r in self.rows), default=10)
        lines = [f"{r.status.upper():8} {r.item:<{w}}  {r.detail}".rstrip() for r in self.rows]
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def focal_reproduction(family: str, points: int = 50, seed: int = 0) -> dict:
    """Focal values of a built-in family against the reference expressions:
    exact certification of each factor, the return-map oracle, and the signs."""
    fam = by_name(family)
    vals = focal_values(fam, FOCAL_COUNT[family])
    aligned, report = align_to_reference(vals, reference_values(fam))
    oracle = oracle_check(aligned, points, seed)
    return {
        "family": family,
        "factors": [str(f) for f in aligned.factors],
        "certified": all(a.method == "exact" for a in report),
        "alignment": [{"value": f"v{2 * a.index + 1}", "factor": str(a.factor), "method": a.method}
                      for a in report],
        "oracle": oracle.to_json(),
        "oracle_ok": oracle.passed(1e-8),
        "negative": [f"v{2 * j + 1}" for j, f in enumerate(aligned.factors) if f < 0],
        "center_conditions": {name: center_variety_check(fam, vals, cond)
                              for name, cond in CENTER_CONDITIONS[family].items()},
    }


def _focal_rows(seed, report: SuiteReport):
    details = {}
    for family in FOCAL_COUNT:
        res = focal_reproduction(family, seed=seed)
        details[family] = res
        factors = ", ".join(res["factors"])
        report.rows.append(SuiteRow(f"focal/{family}/certified", "focal-values",
                                    "pass" if res["certified"] else "fail", f"factors {factors}"))
        report.rows.append(SuiteRow(
            f"focal/{family}/oracle", "focal-values", "pass" if res["oracle_ok"] else "fail",
            f"worst relative {res['oracle']['worst_relative']:.2e} over {res['oracle']['points']} points per value",
        ))
        report.rows.append(SuiteRow(
            f"focal/{family}/positive-factors", "focal-values", "fail" if res["negative"] else "pass",
            f"negative: {', '.join(res['negative'])}" if res["negative"] else "",
        ))
        for name, ok in res["center_conditions"].items():
            report.rows.append(SuiteRow(f"focal/{family}/center-{name}", "focal-values", "pass" if ok else "fail"))
    report.details["focal_values"] = details


def _lemma_rows(only, report: SuiteReport):
    details = {}
    for rep in check_all(only):
        details[rep.key] = rep.to_json()
        bad = [e for e in rep.discrepancies() if not e.recorded_only]
        recorded = [e for e in rep.entries if e.recorded_only]
        seen = []
        for e in bad:
            text = f"v{2 * e.j + 1},{e.r}: {e.verdict}" + (f" x{e.factor}" if e.factor not in (None, 1) else "")
            if text not in seen:
                seen.append(text)
        detail = "; ".join(seen)
        report.rows.append(SuiteRow(f"lemma/{rep.key}", "lemma-tables", "pass" if rep.passed else "fail", detail))
        for e in recorded:
            report.rows.append(SuiteRow(
                f"lemma/{rep.key}/v{2 * e.j + 1},{e.r}", "lemma-tables", "recorded",
                f"{e.verdict}: computed {e.computed}",
            ))
    report.details["lemma_tables"] = details


def _plan_rows(only, seed, report: SuiteReport):
    details = {}
    for key in plan_keys():
        if only and key != only:
            continue
        rep = verify_plan(essential_plan(key), seed=seed)
        details[key] = rep.to_json()
        report.rows.append(SuiteRow(f"plan/{key}", "essential-plans", "pass" if rep.passed else "fail",
                                    "; ".join(rep.failures)))
    report.details["plans"] = details


def _range_rows(seed, report: SuiteReport):
    details = []
    fam = bautin()
    for tag, point, k in RANGE_SAMPLES:
        case = classify(fam, point)
        rr = phi_range_sample(case, k, 30, seed=seed)
        details.append(rr.to_json())
        for claim in rr.claims:
            report.rows.append(SuiteRow(
                f"range/{tag}/k={k}: {claim['claim']}", "range-samples",
                "pass" if claim["verdict"] else "fail",
            ))
    report.details["range_samples"] = details


def _numeric_rows(seed, report: SuiteReport):
    from .melnum.bifurcation import verify_bifurcation
    from .melnum.melnikov import h_grid, m1_curve
    from .melnum.systems import TWO_ZERO_DIRECTION, example_flow
    from .melnum.zeros import find_zeros, zero_count

    hs = h_grid(200, 0.0, 1.0)
    basis = {p: m1_curve(example_flow({p: 1}), hs) for p in ("l1", "l2", "l5")}
    rng = random.Random(seed)
    worst = 0
    for _ in range(100):
        w = {p: rng.uniform(-1, 1) for p in basis}
        vals = sum(w[p] * basis[p].values for p in basis)
        ev = lambda h, w=w: sum(w[p] * basis[p].evaluator(h) for p in basis)
        worst = max(worst, zero_count(find_zeros((hs, vals), ev)))
    report.rows.append(SuiteRow("numeric/example-zero-bound", "numeric", "pass" if worst <= 2 else "fail",
                                f"max zero count over 100 draws: {worst}"))
    flow = example_flow(TWO_ZERO_DIRECTION)
    zeros = find_zeros(m1_curve(flow, hs))
    reps = [verify_bifurcation(flow, z.h, 1e-3) for z in zeros]
    ok = len(zeros) == 2 and all(r.found for r in reps)
    detail = ", ".join(f"h*={r.h_star:.4f} -> {r.h_cycle:.4f} ({r.stability}, P'={r.derivative:.6f})"
                       for r in reps if r.found)
    report.rows.append(SuiteRow("numeric/example-bifurcation", "numeric", "pass" if ok else "fail", detail))
    report.details["bifurcation"] = [r.to_json() for r in reps]
    report.details["bifurcation_zeros"] = [z.to_json() for z in zeros]


def run_suite(only: str | None = None, numeric: bool = False, seed: int = 0) -> SuiteReport:
    report = SuiteReport()
    only = only.lower() if only else None
    if only is None:
        _focal_rows(seed, report)
    _lemma_rows(only, report)
    _plan_rows(only, seed, report)
    if only is None:
        _range_rows(seed, report)
        if numeric:
            _numeric_rows(seed, report)
    return report
