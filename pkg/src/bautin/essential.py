"""Center-case classification and essential perturbation plans.

A plan is data: the perturbation as parameter series (the authoritative
form), the vector field as printed for reference, the expected Melnikov order
and the expected coefficient of each Bautin function.  :func:`verify_plan`
never trusts the data; it re-derives the coefficient table from the focal
values and compares.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence

from .epsseries import ParamSeries, expand
from .families import XY, SystemFamily, bautin, project, sibirsky
from .lemmas import find_case as find_lemma_case
from .lemmas import reference_focal_values
from .liapunov import FocalValues, center_variety_check, focal_values
from .poly import MultiPoly, exact_divide, parse, unify

# ---------------------------------------------------------------------------
# classification


class NotACenter(ValueError):
    pass


class UnclassifiedDegenerate(ValueError):
    def __init__(self, failed: dict[str, list[str]]):
        self.failed = failed
        lines = "; ".join(f"{tag}: {', '.join(w)}" for tag, w in failed.items())
        super().__init__(f"unclassified degenerate center ({lines})")


@dataclass(frozen=True)
class CaseRule:
    tag: str
    equalities: tuple[str, ...]  # polynomials that must vanish
    inequalities: tuple[str, ...]  # polynomials that must not vanish


_Q_RULES = (
    CaseRule("Q-Linear", ("l1", "l2", "l3", "l4", "l5", "l6"), ()),
    CaseRule("Q-HamTriangle", ("l1", "l2", "l4", "l5", "l3 - l6"), ("l6",)),
    CaseRule("Q-HamLV", ("l1", "l4", "l5", "l3 - l6"), ("l2",)),
    CaseRule("Q-SymDarboux", ("l1", "l2", "l5", "l4 + 5*l3 - 5*l6", "l3*l6 - 2*l6^2"), ("l4",)),
    CaseRule("Q-SymHamiltonian", ("l1", "l2", "l4", "l5"), ("l3 - l6",)),
    CaseRule("Q-SymLV", ("l1", "l2", "l5", "l3 - l6"), ("l4",)),
    CaseRule("Q-GenericDarboux", ("l1", "l5", "l4 + 5*l3 - 5*l6", "l3*l6 - 2*l6^2 - l2^2"), ("l2*l4*(l3 - l6)",)),
    CaseRule("Q-GenericHamiltonian", ("l1", "l4", "l5"), ("l2*(l3 - l6)",)),
    CaseRule("Q-GenericSymmetric", ("l1", "l2", "l5"),
             ("l4*(l3 - l6)", "(l4 + 5*l3 - 5*l6)^2 + (l3*l6 - 2*l6^2)^2")),
    CaseRule("Q-GenericLV", ("l1", "l3 - l6"), ("l5",)),
)

_C_RULES = (
    CaseRule("C-Linear", ("lam", "xi", "a", "nu", "theta", "omega", "eta", "mu"), ()),
    CaseRule("C-SymDarboux", ("lam", "xi", "nu", "theta", "omega", "eta", "4*mu^2 - a^2"), ("a",)),
    CaseRule("C-HamSymmetric", ("lam", "xi", "a", "nu", "theta"), ("omega^2 + eta^2 + mu^2",)),
    CaseRule("C-GenDarboux", ("lam", "xi", "nu", "omega", "eta", "4*(mu^2 + theta^2) - a^2"), ("a", "theta")),
    CaseRule("C-GenSymmetric", ("lam", "xi", "nu", "theta"), ("a", "omega^2 + eta^2 + (4*mu^2 - a^2)^2")),
    CaseRule("C-GenHam2", ("lam", "a", "xi", "nu", "omega"), ("theta",)),
    CaseRule("C-GenHam1", ("lam", "a", "xi"), ("nu^2 + theta^2", "nu^2 + omega^2")),
)


@dataclass
class CenterCase:
    family: str  # "bautin" / "sibirsky"
    tag: str
    point: dict[str, Fraction]
    witness: dict[str, str]

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "tag": self.tag,
            "point": {k: str(v) for k, v in self.point.items()},
            "witness": self.witness,
        }


_FV_CACHE: dict[str, FocalValues] = {}


def _computed_values(fam: SystemFamily) -> FocalValues:
    key = fam.kind.value
    if key not in _FV_CACHE:
        _FV_CACHE[key] = focal_values(fam, 4 if key == "bautin" else 6)
    return _FV_CACHE[key]


def _family(name: str) -> SystemFamily:
    return bautin() if name == "bautin" else sibirsky()


def classify(fam: SystemFamily, point: Mapping[str, object]) -> CenterCase:
    name = fam.kind.value
    if name not in ("bautin", "sibirsky"):
        raise ValueError("classification is defined for the built-in families only")
    pt = {p: Fraction(point[p]) for p in fam.params}
    vals = _computed_values(fam)
    if not center_variety_check(fam, vals, pt):
        raise NotACenter("not on center variety: some focal value is nonzero at this point")
    rules = _Q_RULES if name == "bautin" else _C_RULES
    failed: dict[str, list[str]] = {}
    for rule in rules:
        if any(parse(e, fam.params).eval(pt) != 0 for e in rule.equalities):
            continue
        values = {ineq: parse(ineq, fam.params).eval(pt) for ineq in rule.inequalities}
        bad = [f"{k} = 0" for k, v in values.items() if v == 0]
        if bad:
            failed[rule.tag] = bad
            continue
        witness = {k: f"{v} != 0" for k, v in values.items()}
        return CenterCase(name, rule.tag, pt, witness)
    raise UnclassifiedDegenerate(failed)


# ---------------------------------------------------------------------------
# plan data


@dataclass(frozen=True)
class PlanData:
    key: str
    tag: str
    family: str
    k_star: int
    series: dict[str, dict[int, str]]  # perturbation part; base terms p_0 are implicit
    printed_x: str
    printed_y: str
    form: dict[int, str]  # Bautin-function index j -> expected coefficient
    essential: tuple[str, ...]
    fixed: dict[str, str] = field(default_factory=dict)  # choices baked into the series
    note: str = ""


_PLANS: tuple[PlanData, ...] = (
    PlanData("q-i", "Q-GenericLV", "bautin", 1,
             {"l1": {1: "l1_1"}, "l6": {1: "l6_1"}},
             "-y - l6_0*x^2 + (2*l2_0 + l5_0)*x*y + l6_0*y^2 + eps*(l1_1*x + l6_1*y^2)",
             "x + l2_0*x^2 + (2*l6_0 + l4_0)*x*y - l2_0*y^2 + eps*l1_1*y",
             {0: "l1_1", 1: "l6_1"}, ("l1_1", "l6_1"), note="second function is a combined (tilde) basis element"),
    PlanData("q-ii", "Q-GenericSymmetric", "bautin", 1,
             {"l1": {1: "l1_1"}, "l2": {1: "l2_1"}, "l5": {1: "l5_1"}},
             "-y - l3_0*x^2 + l6_0*y^2 + eps*(l1_1*x + (2*l2_1 + l5_1)*x*y)",
             "x + (2*l3_0 + l4_0)*x*y + eps*(l1_1*y + l2_1*x^2 - l2_1*y^2)",
             {0: "l1_1", 1: "l5_1", 2: "l2_1"}, ("l1_1", "l2_1", "l5_1"),
             note="third function is a combined (tilde) basis element"),
    PlanData("q-iii", "Q-GenericHamiltonian", "bautin", 1,
             {"l1": {1: "l1_1"}, "l4": {1: "l4_1"}, "l5": {1: "l5_1"}},
             "-y - l3_0*x^2 + 2*l2_0*x*y + l6_0*y^2 + eps*(l1_1*x + l5_1*x*y)",
             "x + l2_0*x^2 + 2*l3_0*x*y - l2_0*y^2 + eps*(l1_1*y + l4_1*x*y)",
             {0: "l1_1", 1: "l5_1", 2: "l4_1"}, ("l1_1", "l4_1", "l5_1"),
             note="third function is a combined (tilde) basis element"),
    PlanData("q-iv", "Q-GenericDarboux", "bautin", 1,
             {"l1": {1: "l1_1"}, "l2": {1: "l2_1"}, "l4": {1: "l4_1"}, "l5": {1: "l5_1"}},
             "-y - l3_0*x^2 + 2*l2_0*x*y + l6_0*y^2 + eps*(l1_1*x + (2*l2_1 + l5_1)*x*y)",
             "x + l2_0*x^2 + (7*l6_0 - 5*l3_0)*x*y - l2_0*y^2 + eps*(l1_1*y + l4_1*x*y)",
             {0: "l1_1", 1: "l5_1", 2: "l4_1", 3: "l2_1"}, ("l1_1", "l2_1", "l4_1", "l5_1")),
    PlanData("q-v", "Q-SymLV", "bautin", 2,
             {"l1": {2: "l1_2"}, "l2": {1: "l2_1"}, "l3": {1: "1"}, "l5": {1: "l5_1"}},
             "-y - l6_0*x^2 + l6_0*y^2 + eps*(2*l2_1 + l5_1)*x*y + eps^2*l1_2*x",
             "x + (2*l6_0 + l4_0)*x*y + 2*eps*x*y + eps*l2_1*(x^2 - y^2) + eps^2*l1_2*y",
             {0: "l1_2", 1: "l5_1", 2: "l2_1"}, ("l1_2", "l2_1", "l5_1"), fixed={"l3_1": "1"}),
    PlanData("q-vi", "Q-SymHamiltonian", "bautin", 2,
             {"l1": {2: "l1_2"}, "l2": {1: "1"}, "l4": {1: "l4_1"}, "l5": {2: "l5_2"}},
             "-y - l3_0*x^2 + l6_0*y^2 + eps*2*x*y + eps^2*(l1_2*x + l5_2*x*y)",
             "x + 2*l3_0*x*y + eps*(x^2 + l4_1*x*y - y^2) + eps^2*l1_2*y",
             {0: "l1_2", 1: "l5_2", 2: "l4_1"}, ("l1_2", "l4_1", "l5_2"), fixed={"l2_1": "1"},
             note="third function is a combined (tilde) basis element"),
    PlanData("q-vii", "Q-SymDarboux", "bautin", 2,
             {"l1": {2: "l1_2"}, "l2": {1: "1"}, "l4": {1: "l4_1"}, "l5": {2: "l5_2"}, "l6": {1: "l6_1"}},
             "-y - l3_0*x^2 + l6_0*y^2 + eps*(2*x*y + l6_1*y^2) + eps^2*(l1_2*x + l5_2*x*y)",
             "x + (5*l6_0 - 3*l3_0)*x*y + eps*(x^2 + l4_1*x*y - y^2) + eps^2*l1_2*y",
             {0: "l1_2", 1: "l5_2", 2: "l4_1", 3: "l6_1"}, ("l1_2", "l4_1", "l5_2", "l6_1"), fixed={"l2_1": "1"}),
    PlanData("q-viii", "Q-HamLV", "bautin", 3,
             {"l1": {3: "l1_3"}, "l3": {1: "l3_1"}, "l4": {1: "l4_1"}, "l5": {2: "l5_2"}},
             "-y - l6_0*x^2 + 2*l2_0*x*y + l6_0*y^2 - eps*l3_1*x^2 + eps^2*l5_2*x*y + eps^3*l1_3*x",
             "x + l2_0*x^2 + 2*l6_0*x*y - l2_0*y^2 + eps*(2*l3_1 + l4_1)*x*y + eps^3*l1_3*y",
             {0: "l1_3", 1: "l3_1*l5_2", 2: "l3_1*(l4_1 + 5*l3_1)*l4_1", 3: "l3_1^2*l4_1"},
             ("l1_3", "l3_1", "l4_1", "l5_2")),
    PlanData("q-ix", "Q-HamTriangle", "bautin", 4,
             {"l1": {4: "l1_4"}, "l2": {1: "l2_1"}, "l3": {1: "1"}, "l4": {1: "l4_1"}, "l5": {3: "l5_3"}},
             "-y - l6_0*x^2 + l6_0*y^2 - eps*(x^2 + 2*l2_1*x*y) + eps^3*l5_3*x*y + eps^4*l1_4*x",
             "x + 2*l6_0*x*y + eps*(l2_1*x^2 + (-2 + l4_1)*x*y - l2_1*y^2) + eps^4*l1_4*y",
             {0: "l1_4", 1: "l5_3", 2: "l2_1*(l4_1 + 5)*l4_1", 3: "l2_1*l4_1"},
             ("l1_4", "l2_1", "l4_1", "l5_3"), fixed={"l3_1": "1"}),
    PlanData("q-x", "Q-Linear", "bautin", 6,
             {"l1": {6: "l1_6"}, "l2": {1: "l2_1"}, "l3": {1: "5/4"}, "l4": {1: "-5", 3: "l4_3"},
              "l5": {5: "l5_5"}, "l6": {1: "1/4"}},
             "-y + eps*(-5*x^2 + y^2 + 8*l2_1*x*y)/4 + eps^5*l5_5*x*y + eps^6*l1_6*x",
             "x + eps*(-5*x*y + 2*l2_1*(x^2 - y^2)) + eps^3*l4_3*x*y + eps^6*l1_6*y",
             {0: "l1_6", 1: "l5_5", 2: "l2_1*l4_3", 3: "l2_1*(16*l2_1^2 - 3)"},
             ("l1_6", "l2_1", "l4_3", "l5_5"), fixed={"l3_1": "5/4", "l6_1": "1/4", "l3_3": "0", "l6_3": "0"}),
    PlanData("c-i-1", "C-GenHam1", "sibirsky", 1,
             {"lam": {1: "lam_1"}, "xi": {1: "xi_1"}, "a": {1: "a_1"}},
             "-y - (omega_0 + theta_0)*x^3 - (eta_0 - 3*mu_0)*x^2*y - (3*omega_0 - 3*theta_0)*x*y^2"
             " - (mu_0 - nu_0)*y^3 + eps*lam_1*x + eps*a_1*x^3 - eps*(2*a_1 - xi_1)*x*y^2",
             "x + (mu_0 + nu_0)*x^3 + (3*omega_0 + 3*theta_0)*x^2*y + (eta_0 - 3*mu_0)*x*y^2"
             " + (omega_0 - theta_0)*y^3 + eps*lam_1*y + eps*2*a_1*x^2*y - eps*a_1*y^3",
             {0: "lam_1", 1: "xi_1", 2: "nu_0*a_1", 3: "omega_0*theta_0*a_1"}, ("lam_1", "xi_1", "a_1")),
    PlanData("c-i-2", "C-GenHam2", "sibirsky", 2,
             {"lam": {2: "lam_2"}, "xi": {2: "xi_2"}, "a": {1: "a_1"}, "nu": {1: "nu_1"}, "omega": {1: "omega_1"}},
             "-y - theta_0*x^3 - (eta_0 - 3*mu_0)*x^2*y + 3*theta_0*x*y^2 - mu_0*y^3 - eps*(omega_1 - a_1)*x^3"
             " - eps*(3*omega_1 + 2*a_1)*x*y^2 + eps*nu_1*y^3 + eps^2*lam_2*x + eps^2*xi_2*x*y^2",
             "x + mu_0*x^3 + 3*theta_0*x^2*y + (eta_0 - 3*mu_0)*x*y^2 - theta_0*y^3 + eps*nu_1*x^3"
             " + eps*(3*omega_1 + 2*a_1)*x^2*y - eps*a_1*y^3 + eps^2*lam_2*y",
             {0: "lam_2", 1: "xi_2", 2: "a_1*nu_1", 3: "a_1*omega_1", 4: "a_1^2*eta_0", 5: "a_1^2"},
             ("lam_2", "xi_2", "a_1", "nu_1", "omega_1")),
    PlanData("c-ii", "C-GenSymmetric", "sibirsky", 1,
             {"lam": {1: "lam_1"}, "xi": {1: "xi_1"}, "nu": {1: "nu_1"}, "theta": {1: "theta_1"}},
             "-y - (omega_0 - a_0)*x^3 - (eta_0 - 3*mu_0)*x^2*y - (3*omega_0 + 2*a_0)*x*y^2 - mu_0*y^3"
             " + eps*lam_1*x - eps*theta_1*x^3 + eps*(3*theta_1 + xi_1)*x*y^2 + eps*nu_1*y^3",
             "x + mu_0*x^3 + (3*omega_0 + 2*a_0)*x^2*y + (eta_0 - 3*mu_0)*x*y^2 + (omega_0 - a_0)*y^3"
             " + eps*lam_1*y + eps*nu_1*x^3 + eps*3*theta_1*x^2*y - eps*theta_1*y^3",
             {0: "lam_1", 1: "xi_1", 2: "nu_1", 3: "theta_1*omega_0", 4: "theta_1*eta_0",
              5: "theta_1*(4*mu_0^2 - a_0^2)"}, ("lam_1", "xi_1", "nu_1", "theta_1")),
    PlanData("c-iii", "C-GenDarboux", "sibirsky", 1,
             {"lam": {1: "lam_1"}, "xi": {1: "xi_1"}, "nu": {1: "nu_1"}, "omega": {1: "omega_1"},
              "eta": {1: "eta_1"}, "a": {1: "a_1"}},
             "-y - (theta_0 - a_0)*x^3 + 3*mu_0*x^2*y - (-3*theta_0 + 2*a_0)*x*y^2 - mu_0*y^3 + eps*lam_1*x"
             " - eps*(omega_1 - a_1)*x^3 - eps*eta_1*x^2*y - eps*(3*omega_1 + 2*a_1 - xi_1)*x*y^2 - nu_1*y^3",
             "x + mu_0*x^3 + (3*theta_0 + 2*a_0)*x^2*y - 3*mu_0*x*y^2 - (theta_0 + a_0)*y^3 + eps*lam_1*y"
             " + eps*nu_1*x^3 + eps*(3*omega_1 + 2*a_1)*x^2*y + eps*eta_1*x*y^2 + eps*(omega_1 - a_1)*y^3",
             {0: "lam_1", 1: "xi_1", 2: "nu_1", 3: "omega_1", 4: "eta_1", 5: "a_1"},
             ("lam_1", "xi_1", "nu_1", "omega_1", "eta_1", "a_1")),
    PlanData("c-iv", "C-HamSymmetric", "sibirsky", 2,
             {"lam": {2: "lam_2"}, "xi": {2: "xi_2"}, "nu": {1: "nu_1"}, "theta": {1: "theta_1"}, "a": {1: "1"}},
             "-y - omega_0*x^3 - (eta_0 - 3*mu_0)*x^2*y - 3*omega_0*x*y^2 - mu_0*y^3 + eps*(1 - theta_1)*x^3"
             " + eps*(3*theta_1 - 2)*x*y^2 + eps*nu_1*y^3 + eps^2*lam_2*x + eps^2*xi_2*x*y^2",
             "x + mu_0*x^3 + 3*omega_0*x^2*y + (eta_0 - 3*mu_0)*x*y^2 + omega_0*y^3 + eps*nu_1*x^3"
             " + eps*(3*theta_1 + 2)*x^2*y - eps*(1 + theta_1)*y^3 + eps^2*lam_2*y",
             {0: "lam_2", 1: "xi_2", 2: "nu_1", 3: "omega_0*theta_1"}, ("lam_2", "xi_2", "nu_1", "theta_1"),
             fixed={"a_1": "1"}),
    PlanData("c-v", "C-SymDarboux", "sibirsky", 2,
             {"lam": {2: "lam_2"}, "xi": {2: "xi_2"}, "nu": {2: "nu_2"}, "theta": {1: "1"},
              "omega": {1: "omega_1"}, "eta": {1: "eta_1"}, "a": {1: "a_1"}},
             "-y + a_0*x^3 + 3*mu_0*x^2*y - 2*a_0*x*y^2 - mu_0*y^3 - eps*(omega_1 - a_1 + 1)*x^3"
             " - eps*eta_1*x^2*y - eps*(3*omega_1 + 2*a_1 - 3)*x*y^2 + eps^2*lam_2*x + eps^2*xi_2*x*y^2"
             " + eps^2*nu_2*y^3",
             "x + mu_0*x^3 + 2*a_0*x^2*y - 3*mu_0*x*y^2 - a_0*y^3 + eps*(3*omega_1 + 2*a_1 + 3)*x^2*y"
             " + eps*eta_1*x*y^2 + eps*(omega_1 - a_1 - 1)*y^3 + eps^2*lam_2*y + eps^2*nu_2*x^3",
             {0: "lam_2", 1: "xi_2", 2: "nu_2", 3: "omega_1", 4: "eta_1", 5: "a_1"},
             ("lam_2", "xi_2", "nu_2", "omega_1", "eta_1", "a_1"), fixed={"theta_1": "1"}),
    PlanData("c-vi", "C-Linear", "sibirsky", 5,
             {"lam": {5: "lam_5"}, "xi": {5: "xi_5"}, "nu": {4: "nu_4"}, "omega": {3: "omega_3"},
              "eta": {2: "eta_2"}, "theta": {1: "theta_1"}, "a": {1: "1"}},
             "-y - eps*(omega_1 - 1)*x^3 + eps*(3*theta_1 - 2)*x*y^2 - eps^2*eta_2*x^2*y - eps^3*omega_3*x^3"
             " - 3*eps^3*omega_3*x*y^2 + eps^4*nu_4*y^3 + eps^5*lam_5*x + eps^5*xi_5*x*y^2",
             "x + eps*(3*theta_1 + 2)*x^2*y - eps*(theta_1 + 1)*y^3 + eps^2*eta_2*x*y^2 + 3*eps^3*omega_3*x^2*y"
             " + eps^3*omega_3*y^3 + eps^4*nu_4*x^3 + eps^5*lam_5*y",
             {0: "lam_5", 1: "xi_5", 2: "nu_4", 3: "theta_1*omega_3", 4: "theta_1*eta_2",
              5: "4*theta_1^3 - theta_1"}, ("lam_5", "xi_5", "nu_4", "omega_3", "eta_2", "theta_1"),
             fixed={"a_1": "1"}),
)


def plan_keys() -> list[str]:
    return [p.key for p in _PLANS]


def plan_data(key_or_tag: str) -> PlanData:
    k = key_or_tag.lower()
    for p in _PLANS:
        if p.key == k or p.tag.lower() == k:
            return p
    raise KeyError(f"no plan for {key_or_tag!r}")


@dataclass
class EssentialPlan:
    data: PlanData
    base: tuple[dict[str, MultiPoly], ...]  # one substitution for lam(0) per variety component
    overrides: dict[str, MultiPoly] = field(default_factory=dict)
    k_star: int = 0
    point: dict[str, Fraction] | None = None

    @property
    def tag(self) -> str:
        return self.data.tag

    @property
    def essential_params(self) -> tuple[str, ...]:
        return tuple(p for p in self.data.essential if p not in self.overrides)

    def family(self) -> SystemFamily:
        return _family(self.data.family)

    def series(self, component: int = 0) -> ParamSeries:
        fam = self.family()
        table = {p: {0: f"{p}_0"} for p in fam.params}
        for p, row in self.data.series.items():
            table[p].update(row)
        depth = max([self.k_star, *(int(l) for row in table.values() for l in row)])
        s = ParamSeries.from_table(fam.params, table, depth, tail="zero")
        if self.overrides:
            s = s.subs(self.overrides)
        return s.subs(self.base[component])

    def form(self, component: int = 0) -> dict[int, MultiPoly]:
        out = {}
        for j, text in self.data.form.items():
            p = parse(text)
            p = _subst_all(p, [self.overrides, self.base[component]])
            out[j] = p
        return out

    def perturbed_field(self, component: int = 0) -> tuple[MultiPoly, MultiPoly]:
        """The vector field over x, y, eps and the remaining symbols."""
        fam = self.family()
        s = self.series(component)
        ring = XY + ("eps",) + s.ring
        eps = MultiPoly.var(ring, "eps")
        vals = {}
        for p in fam.params:
            acc = MultiPoly.zero(ring)
            for l, c in enumerate(s.coeffs[p]):
                if not c.is_zero():
                    acc = acc + c.to_vars(ring) * eps**l
            vals[p] = acc
        return fam.rhs_x.subs(vals, ring), fam.rhs_y.subs(vals, ring)

    def with_overrides(self, **values) -> "EssentialPlan":
        ov = dict(self.overrides)
        ov.update({k: parse(str(v)) if not isinstance(v, MultiPoly) else v for k, v in values.items()})
        return replace(self, overrides=ov)

    def with_order(self, k: int) -> "EssentialPlan":
        return replace(self, k_star=k)

    def to_json(self) -> dict:
        out = {
            "case": self.data.key,
            "tag": self.tag,
            "k_star": self.k_star,
            "essential_params": list(self.essential_params),
            "fixed": dict(self.data.fixed),
            "series": self.series().to_json(),
            "melnikov_form": {f"v{2 * j + 1}": str(c) for j, c in self.form().items()},
        }
        fx, fy = self.perturbed_field()
        out["perturbed_system"] = {"x'": str(fx), "y'": str(fy)}
        if self.point is not None:
            out["point"] = {k: str(v) for k, v in self.point.items()}
        if self.data.note:
            out["note"] = self.data.note
        return out


def _subst_all(p: MultiPoly, subs: Sequence[Mapping[str, MultiPoly]]) -> MultiPoly:
    for sub in subs:
        if not sub:
            continue
        ring = [v for v in p.vars if v not in sub]
        for img in sub.values():
            ring.extend(v for v in img.vars if v not in ring)
        p = p.subs(sub, ring).shrink()
    return p


def _base_components(data: PlanData) -> tuple[dict[str, MultiPoly], ...]:
    lem = find_lemma_case(data.key)
    return tuple({k: parse(v) for k, v in comp.items()} for comp in lem.base)


def essential_plan(case: CenterCase | str, point: Mapping[str, object] | None = None) -> EssentialPlan:
    """Plan for a classified case.  With a concrete point the base values are
    numeric; with only a tag they stay symbolic on the case's variety."""
    if isinstance(case, CenterCase):
        data = plan_data(case.tag)
        point = case.point if point is None else point
    else:
        data = plan_data(case)
    if point is not None:
        fam = _family(data.family)
        pt = {p: Fraction(point[p]) for p in fam.params}
        base = ({f"{p}_0": MultiPoly.const((), pt[p]) for p in fam.params},)
        return EssentialPlan(data, base, {}, data.k_star, pt)
    return EssentialPlan(data, _base_components(data), {}, data.k_star)


# ---------------------------------------------------------------------------
# verification


@dataclass
class PlanReport:
    case: str
    tag: str
    k_star: int
    passed: bool
    failures: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    absorbed: dict[str, str] = field(default_factory=dict)
    computed_row: list[str] = field(default_factory=list)
    points_checked: int = 0

    def to_json(self) -> dict:
        return {
            "case": self.case,
            "tag": self.tag,
            "k_star": self.k_star,
            "passed": self.passed,
            "failures": self.failures,
            "notes": self.notes,
            "absorbed_factors": self.absorbed,
            "computed_row": self.computed_row,
            "points_checked": self.points_checked,
        }


def _rank(rows: list[list[Fraction]]) -> int:
    m = [r[:] for r in rows if any(r)]
    rank = 0
    ncols = len(m[0]) if m else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][col] != 0:
                f = m[i][col] / m[rank][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


def span_relation(a: list[MultiPoly], b: list[MultiPoly]) -> tuple[int, int, int]:
    """Ranks of span(a), span(b) and span(a + b) as rational vector spaces."""
    polys = unify(*(a + b)) if a or b else []
    monos = sorted({e for p in polys for e in p.terms})
    vec = [[p.terms.get(m, Fraction(0)) for m in monos] for p in polys]
    return _rank(vec[:len(a)]), _rank(vec[len(a):]), _rank(vec)


def _random_rational(rng: random.Random, bound: int = 1000, scale: int = 3) -> Fraction:
    """Nonzero rational in [-scale, scale] with denominator up to ``bound``."""
    while True:
        den = rng.randint(1, bound)
        num = rng.randint(-min(bound, scale * den), min(bound, scale * den))
        if num:
            return Fraction(num, den)


def _sample_base_points(plan: EssentialPlan, component: int, n: int, rng: random.Random):
    """Rational points on the case's variety component, restricted to points
    that classify to the plan's tag."""
    fam = plan.family()
    base = plan.base[component]
    lam0 = {}
    for p in fam.params:
        sym = f"{p}_0"
        lam0[p] = base.get(sym, parse(sym))
    free = sorted({v for img in lam0.values() for v in img.used_vars()})
    pts = []
    tries = 0
    while len(pts) < n and tries < 200 * n:
        tries += 1
        assign = {v: _random_rational(rng) for v in free}
        pt = {p: img.eval(assign) for p, img in lam0.items()}
        try:
            case = classify(fam, pt)
        except ValueError:
            continue
        if case.tag == plan.tag:
            pts.append(assign)
    return pts


def verify_plan(plan: EssentialPlan, points: int = 6, seed: int = 0) -> PlanReport:
    vals, _ = reference_focal_values(plan.data.family)
    fam = plan.family()
    rep = PlanReport(plan.data.key, plan.tag, plan.k_star, True)
    rng = random.Random(seed)
    k = plan.k_star
    for comp in range(len(plan.base)):
        series = plan.series(comp)
        tab = expand(vals, series, max(k, 1))
        label = f"component {comp}: " if len(plan.base) > 1 else ""
        for r in range(0, k):
            for j, row in enumerate(tab.rows):
                if not row[r].is_zero():
                    rep.passed = False
                    rep.failures.append(f"{label}row r={r} nonzero: v{2 * j + 1} coefficient {row[r]}")
        if rep.failures:
            continue
        row = [c.shrink() for c in tab.column(k)]
        form = plan.form(comp)
        if comp == 0:
            rep.computed_row = [str(c) for c in row]
        for j, t in form.items():
            if t.is_zero():
                rep.notes.append(f"{label}expected coefficient of v{2 * j + 1} vanishes identically (degenerate)")
                continue
            cj, tj = unify(row[j], t)
            q = exact_divide(cj, tj)
            if q is not None:
                rep.absorbed[f"{label}v{2 * j + 1}"] = str(q.shrink())
        # span comparison at sample points of lam(0)
        if plan.point is not None:
            samples = [{}]
        else:
            samples = _sample_base_points(plan, comp, points, rng)
            if not samples:
                rep.passed = False
                rep.failures.append(f"{label}could not sample a base point of this case")
                continue
        for assign in samples:
            sub = {v: MultiPoly.const((), c) for v, c in assign.items()}
            crow = [_subst_all(c, [sub]) for c in row]
            trow = [_subst_all(t, [sub]) for t in form.values()]
            ra, rb, rab = span_relation(crow, trow)
            rep.points_checked += 1
            if not (ra == rb == rab):
                rep.passed = False
                rep.failures.append(
                    f"{label}span mismatch at {({v: str(c) for v, c in assign.items()})}: "
                    f"rank computed {ra}, expected {rb}, joint {rab}"
                )
                break
    rep.notes.extend(_printed_system_notes(plan, fam))
    return rep


def _printed_system_notes(plan: EssentialPlan, fam: SystemFamily) -> list[str]:
    """Compare the printed vector field with the series data."""
    notes = []
    for comp in range(len(plan.base)):
        label = f"component {comp}: " if len(plan.base) > 1 else ""
        px, py = parse(plan.data.printed_x), parse(plan.data.printed_y)
        names = sorted((set(px.vars) | set(py.vars)) - set(XY))
        ring = XY + tuple(names)
        px, py = px.to_vars(ring), py.to_vars(ring)
        base = {k: v for k, v in plan.base[comp].items()}
        sub = dict(plan.overrides)
        sub.update(base)
        px, py = _subst_all(px, [sub]), _subst_all(py, [sub])
        names = sorted((set(px.vars) | set(py.vars)) - set(XY))
        ring = XY + tuple(names)
        px, py = px.to_vars(ring), py.to_vars(ring)
        proj = project(fam, px, py)
        if not proj.consistent:
            notes.append(
                f"{label}printed system is not of the family's form; leftover x': {proj.residual_x}, "
                f"y': {proj.residual_y}"
            )
            continue
        series = plan.series(comp)
        ring2 = tuple(sorted(set(ring[2:]) | set(series.ring)))
        eps_poly = {}
        for p in fam.params:
            acc = MultiPoly.zero(ring2)
            e = MultiPoly.var(ring2, "eps") if "eps" in ring2 else None
            for l, c in enumerate(series.coeffs[p]):
                if not c.is_zero():
                    acc = acc + c.to_vars(ring2) * (e**l if e is not None else 1)
            eps_poly[p] = acc
        diffs = []
        for p in fam.params:
            got = proj.values[p].to_vars(ring2)
            if got != eps_poly[p]:
                diffs.append(f"{p}: printed gives {got}, series has {eps_poly[p]}")
        if diffs:
            notes.append(f"{label}printed system implies different series ({'; '.join(diffs)})")
    return notes


# ---------------------------------------------------------------------------
# range sampling


@dataclass
class RangeReport:
    case: str
    k: int
    samples: int
    affine_rank: int
    vectors_preview: list[list[str]]
    claims: list[dict]
    hypotheses: dict[str, str] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "case": self.case,
            "k": self.k,
            "samples": self.samples,
            "evidence": "random sampling only",
            "affine_rank": self.affine_rank,
            "imposed_hypotheses": self.hypotheses,
            "hit_sets": self.vectors_preview,
            "claims": self.claims,
        }


def _affine_rank(vectors: list[list[Fraction]]) -> int:
    if len(vectors) < 2:
        return 0
    v0 = vectors[0]
    return _rank([[a - b for a, b in zip(v, v0)] for v in vectors[1:]])


def _series_index(name: str) -> tuple[int, str]:
    head, _, tail = name.rpartition("_")
    return (int(tail), head) if tail.isdigit() else (-1, name)


def _solve_entry(e: MultiPoly) -> tuple[str, MultiPoly] | None:
    """A substitution making e vanish: solve for a variable occurring
    linearly with constant coefficient, else zero a variable dividing e."""
    used = sorted(e.used_vars(), key=_series_index, reverse=True)
    for v in used:
        if e.degree_in(v) != 1:
            continue
        i = e.vars.index(v)
        lin = {m: c for m, c in e.terms.items() if m[i] == 1}
        if len(lin) == 1:
            (m, c), = lin.items()
            if sum(m) == 1:
                rest = MultiPoly(e.vars, {mm: cc for mm, cc in e.terms.items() if mm[i] == 0})
                return v, (rest * (-1 / c)).shrink()
    for v in used:
        i = e.vars.index(v)
        if all(m[i] > 0 for m in e.terms):
            return v, MultiPoly.const((), 0)
    return None


def _stated_hypotheses(tag: str, k: int) -> dict[str, MultiPoly]:
    lem = find_lemma_case(plan_data(tag).key)
    for st in lem.stages:
        if st.order == k and st.branches[0]:
            return {kk: parse(v) for kk, v in st.branches[0].items()}
    return {}


def phi_range_sample(case: CenterCase, k: int, n: int, seed: int = 0) -> RangeReport:
    """Sample coefficient vectors of the order-k Melnikov function at the
    case's base point, with random rational series tails on which every
    lower-order row vanishes."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if k < 1:
        raise ValueError("k must be at least 1")
    vals, _ = reference_focal_values(case.family)
    fam = _family(case.family)
    rng = random.Random(seed)
    base = {f"{p}_0": MultiPoly.const((), case.point[p]) for p in fam.params}
    hyp = _stated_hypotheses(case.tag, k)
    for _ in range(200):
        series = ParamSeries.symbolic(fam.params, k, tail="zero").subs(base)
        if hyp:
            series = series.subs(hyp)
        tab = expand(vals, series, k)
        bad = next((tab.rows[j][r] for r in range(k) for j in range(len(tab.rows))
                    if not tab.rows[j][r].is_zero()), None)
        if bad is None:
            break
        step = _solve_entry(bad)
        if step is None:
            raise ValueError(f"cannot impose vanishing of lower-order entry {bad}")
        v, img = step
        hyp = {kk: _subst_all(vv, [{v: img}]) for kk, vv in hyp.items()}
        hyp[v] = img
    else:
        raise ValueError("lower-order vanishing did not converge")
    row = tab.column(k)
    free = sorted({v for c in row for v in c.used_vars()})
    vectors = []
    for _ in range(n):
        assign = {v: _random_rational(rng, scale=1) for v in free}
        vectors.append([c.eval(assign) for c in row])
    claims = _case_claims(case, k, vectors)
    rep = RangeReport(case.tag, k, n, _affine_rank(vectors),
                      [[str(x) for x in v] for v in vectors[:5]], claims)
    rep.hypotheses = {kk: str(vv) for kk, vv in sorted(hyp.items())}
    return rep


def _case_claims(case: CenterCase, k: int, vectors: list[list[Fraction]]) -> list[dict]:
    out = []
    last = len(vectors[0]) - 1
    tag = case.tag
    if tag == "Q-GenericDarboux" and k == 1:
        out.append({"claim": "k=1 samples have full affine rank 4", "verdict": _affine_rank(vectors) == 4})
    if tag == "Q-SymLV" and k >= 2:
        out.append({"claim": "fourth coefficient is always 0", "verdict": all(v[3] == 0 for v in vectors)})
    if tag == "Q-Linear" and k == 1:
        out.append({"claim": "only the first coefficient is nonzero",
                    "verdict": all(all(x == 0 for x in v[1:]) for v in vectors)})
    if tag == "Q-HamTriangle" and k in (1, 2, 3, 5):
        out.append({"claim": f"v7 row vanishes at order {k}", "verdict": all(v[3] == 0 for v in vectors)})
    if tag == "Q-HamLV":
        s = case.point["l6"] ** 2 + case.point["l2"] ** 2
        if k == 4:
            out.append({"claim": "samples lie in {(a,b,c,d): d != 0, s*c - 5*d = 0} as printed",
                        "verdict": all(v[3] != 0 and s * v[2] - 5 * v[3] == 0 for v in vectors)})
            out.append({"claim": "samples lie in {(a,b,c,d): d != 0, s*c + 5*d = 0} (sign-corrected)",
                        "verdict": all(v[3] != 0 and s * v[2] + 5 * v[3] == 0 for v in vectors)})
        if k == 5:
            out.append({"claim": "samples lie in {(a,b,c,d): c != 0, d = 0}",
                        "verdict": all(v[2] != 0 and v[3] == 0 for v in vectors)})
        if k == 3:
            out.append({"claim": "no sample lies on the excluded surfaces",
                        "verdict": all(not (v[3] != 0 and s * v[2] - 5 * v[3] == 0)
                                       and not (v[2] != 0 and v[3] == 0) for v in vectors)})
            out.append({"claim": "k=3 samples have full affine rank 4", "verdict": _affine_rank(vectors) == 4})
    if last >= 0 and not out:
        out.append({"claim": "affine rank of samples", "verdict": True,
                    "value": _affine_rank(vectors)})
    return out
