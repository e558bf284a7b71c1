"""Tables of Melnikov-coefficient formulas at each kind of center, and a checker.

Every case fixes the base point lam(0) on a component of the center variety
(nonlinear components are replaced by a rational parametrization so that the
check is an exact polynomial identity), then lists stages.  A stage imposes
extra hypotheses on the series coefficients (one substitution per branch) and
states expected formulas for entries ``(j, r)`` of the coefficient table.
The checker recomputes each entry and classifies the agreement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .epsseries import ParamSeries, expand
from .families import SystemFamily, bautin, sibirsky
from .liapunov import FocalValues, align_to_reference, focal_values, reference_values
from .poly import MultiPoly, parse

Sub = dict[str, str]


@dataclass(frozen=True)
class Stage:
    order: int
    expected: dict[tuple[int, int], str]
    branches: tuple[Sub, ...] = ({},)
    recorded_only: frozenset = frozenset()
    note: str = ""


@dataclass(frozen=True)
class LemmaCase:
    key: str
    tag: str
    family: str  # "bautin" or "sibirsky"
    base: tuple[Sub, ...]  # one substitution per component of the case
    stages: tuple[Stage, ...]


def _zero_below(names: list[str], k: int, start: int = 1) -> Sub:
    return {f"{n}_{l}": "0" for n in names for l in range(start, k)}


# ---------------------------------------------------------------------------
# quadratic family

_Q_ALL = ("l1", "l2", "l3", "l4", "l5", "l6")


def _quadratic_cases() -> list[LemmaCase]:
    cases = []
    D0 = "(l3_0 - l6_0)"
    D1 = "(l3_1 - l6_1)"

    # generic Lotka-Volterra
    stages = []
    for k in (1, 2, 3):
        hyp = _zero_below(["l1"], k)
        hyp.update({f"l3_{l}": f"l6_{l}" for l in range(1, k)})
        stages.append(Stage(k, {
            (0, k): f"l1_{k}",
            (1, k): f"l5_0*(l3_{k} - l6_{k})",
            (2, k): f"l2_0*l4_0^2*(l3_{k} - l6_{k})",
            (3, k): "0",
        }, (hyp,)))
    cases.append(LemmaCase("q-i", "Q-GenericLV", "bautin", ({"l1_0": "0", "l3_0": "l6_0"},), tuple(stages)))

    # generic symmetric
    stages = []
    for k in (1, 2, 3):
        hyp = _zero_below(["l1", "l2", "l5"], k)
        stages.append(Stage(k, {
            (0, k): f"l1_{k}",
            (1, k): f"{D0}*l5_{k}",
            (2, k): f"l4_0^2*{D0}*(l4_0 + 5*l3_0 - 5*l6_0)*l2_{k}",
            (3, k): f"l4_0*{D0}^2*(l3_0*l6_0 - 2*l6_0^2)*l2_{k}",
        }, (hyp,)))
    cases.append(LemmaCase("q-ii", "Q-GenericSymmetric", "bautin", ({"l1_0": "0", "l2_0": "0", "l5_0": "0"},), tuple(stages)))

    # generic Hamiltonian
    stages = []
    for k in (1, 2, 3):
        hyp = _zero_below(["l1", "l4", "l5"], k)
        stages.append(Stage(k, {
            (0, k): f"l1_{k}",
            (1, k): f"{D0}*l5_{k}",
            (2, k): f"l2_0*{D0}^2*l4_{k}",
            (3, k): f"l2_0*{D0}^2*(l3_0*l6_0 - 2*l6_0^2 - l2_0^2)*l4_{k}",
        }, (hyp,)))
    cases.append(LemmaCase("q-iii", "Q-GenericHamiltonian", "bautin", ({"l1_0": "0", "l4_0": "0", "l5_0": "0"},), tuple(stages)))

    # generic Darboux; l6_0 = s, l2_0 = s*t parametrizes the conic
    darboux = {"l1_0": "0", "l5_0": "0", "l6_0": "s", "l2_0": "s*t", "l3_0": "2*s + s*t^2", "l4_0": "-5*s - 5*s*t^2"}
    cases.append(LemmaCase("q-iv", "Q-GenericDarboux", "bautin", (darboux,), (
        Stage(1, {
            (0, 1): "l1_1",
            (1, 1): f"{D0}*l5_1",
            (2, 1): f"l2_0*l4_0*{D0}*(l4_1 + 5*l3_1 - 5*l6_1)",
            (3, 1): f"l2_0*l4_0*{D0}^2*(l3_0*l6_1 + l6_0*l3_1 - 4*l6_0*l6_1 - 2*l2_0*l2_1)",
        }),
    )))

    # symmetric Lotka-Volterra
    base = {"l1_0": "0", "l2_0": "0", "l5_0": "0", "l3_0": "l6_0"}
    cases.append(LemmaCase("q-v", "Q-SymLV", "bautin", (base,), (
        Stage(1, {(0, 1): "l1_1", (1, 1): "0", (2, 1): "0", (3, 1): "0"}),
        Stage(2, {
            (0, 2): "l1_2",
            (1, 2): f"{D1}*l5_1",
            (2, 2): f"l4_0^2*l2_1*{D1}",
            (3, 2): "0",
        }, ({"l1_1": "0"},)),
        Stage(3, {(3, 3): "0"}, ({"l2_1": "0"}, {"l3_1": "l6_1"}), note="v5 rows vanish below order 3 on each branch"),
        Stage(4, {(3, 4): "0"}, (
            {"l2_1": "0", "l2_2": "0"},
            {"l3_1": "l6_1", "l3_2": "l6_2"},
            {"l2_1": "0", "l3_1": "l6_1"},
        ), note="v5 rows vanish below order 4 on each branch"),
    )))

    # symmetric Hamiltonian
    base = {"l1_0": "0", "l2_0": "0", "l4_0": "0", "l5_0": "0"}
    cases.append(LemmaCase("q-vi", "Q-SymHamiltonian", "bautin", (base,), (
        Stage(1, {(0, 1): "l1_1", (1, 1): f"{D0}*l5_1", (2, 1): "0", (3, 1): "0"}),
        Stage(2, {
            (0, 2): "l1_2",
            (1, 2): f"{D0}*l5_2",
            (2, 2): f"{D0}^2*l2_1*l4_1",
            (3, 2): f"{D0}^2*(l3_0*l6_0 - 2*l6_0^2)*l2_1*l4_1",
        }, ({"l1_1": "0", "l5_1": "0"},)),
        Stage(3, {
            (2, 3): f"{D0}^2*l2_1*l4_2",
            (3, 3): f"{D0}^2*(l3_0*l6_0 - 2*l6_0^2)*l2_1*l4_2",
        }, ({"l4_1": "0"},), note="branch where the surviving index is i = 1"),
        Stage(3, {
            (2, 3): f"{D0}^2*l2_2*l4_1",
            (3, 3): f"{D0}^2*(l3_0*l6_0 - 2*l6_0^2)*l2_2*l4_1",
        }, ({"l2_1": "0"},), note="branch where the surviving index is i = 2"),
    )))

    # symmetric Darboux: two components of l3_0*l6_0 - 2*l6_0^2 = 0
    comp_a = {"l1_0": "0", "l2_0": "0", "l5_0": "0", "l6_0": "0", "l4_0": "-5*l3_0"}
    comp_b = {"l1_0": "0", "l2_0": "0", "l5_0": "0", "l3_0": "2*l6_0", "l4_0": "-5*l6_0"}
    cases.append(LemmaCase("q-vii", "Q-SymDarboux", "bautin", (comp_a, comp_b), (
        Stage(1, {(0, 1): "l1_1", (1, 1): f"{D0}*l5_1", (2, 1): "0", (3, 1): "0"}),
        Stage(2, {
            (0, 2): "l1_2",
            (1, 2): f"{D0}*l5_2",
            (2, 2): f"l4_0*{D0}*l2_1*(l4_1 + 5*l3_1 - 5*l6_1)",
            (3, 2): f"l4_0*{D0}^2*l2_1*(l3_0*l6_1 + l6_0*l3_1)",
        }, ({"l1_1": "0", "l5_1": "0"},)),
    )))

    # Hamiltonian Lotka-Volterra
    base = {"l1_0": "0", "l4_0": "0", "l5_0": "0", "l3_0": "l6_0"}
    cases.append(LemmaCase("q-viii", "Q-HamLV", "bautin", (base,), (
        Stage(1, {(0, 1): "l1_1", (1, 1): "0", (2, 1): "0", (3, 1): "0"}),
        Stage(2, {(0, 2): "l1_2", (1, 2): f"{D1}*l5_1", (2, 2): "0", (3, 2): "0"}, ({"l1_1": "0"},)),
        Stage(3, {
            (0, 3): "l1_3",
            (1, 3): f"{D1}*l5_2",
            (2, 3): f"l2_0*{D1}*(l4_1 + 5*l3_1 - 5*l6_1)*l4_1",
            (3, 3): f"l2_0*(l6_0^2 + l2_0^2)*{D1}^2*l4_1",
        }, ({"l1_1": "0", "l1_2": "0", "l5_1": "0"},)),
        Stage(4, {
            (0, 4): "l1_4",
            (1, 4): f"{D1}*l5_3",
            (2, 4): f"l2_0*{D1}*(5*l3_1 - 5*l6_1)*l4_2",
            (3, 4): f"l2_0*(l6_0^2 + l2_0^2)*{D1}^2*l4_2",
        }, ({"l1_1": "0", "l1_2": "0", "l1_3": "0", "l5_1": "0", "l5_2": "0", "l4_1": "0"},),
            recorded_only=frozenset({(2, 4)}),
            note="rows 1..3 vanish with l3_1 != l6_1, which forces l4_1 = 0"),
        Stage(5, {
            (0, 5): "l1_5",
            (1, 5): "(l3_3 - l6_3)*l5_2",
            (2, 5): "l2_0*l4_1^2*(l3_3 - l6_3)",
            (3, 5): "0",
        }, ({"l1_1": "0", "l1_2": "0", "l1_3": "0", "l1_4": "0", "l3_1": "l6_1", "l5_1": "0", "l3_2": "l6_2"},)),
    )))

    # Hamiltonian triangle
    base = {"l1_0": "0", "l2_0": "0", "l4_0": "0", "l5_0": "0", "l3_0": "l6_0"}
    cases.append(LemmaCase("q-ix", "Q-HamTriangle", "bautin", (base,), (
        Stage(1, {(1, 1): "0", (2, 1): "0", (3, 1): "0"}),
        Stage(2, {(1, 2): f"{D1}*l5_1", (2, 2): "0", (3, 2): "0"}),
        Stage(3, {(2, 3): "0", (3, 3): "0"}),
        Stage(4, {
            (0, 4): "l1_4",
            (1, 4): f"{D1}*l5_3",
            (2, 4): f"l2_1*l4_1*{D1}*(l4_1 + 5*l3_1 - 5*l6_1)",
            (3, 4): f"l6_0^2*l2_1*l4_1*{D1}^2",
        }, ({"l1_1": "0", "l1_2": "0", "l1_3": "0", "l5_1": "0", "l5_2": "0"},),
            note="rows of v1 and v3 vanish for orders 1..3"),
        Stage(5, {
            (1, 1): "0", (2, 1): "0", (3, 1): "0",
            (1, 2): "0", (2, 2): "0", (3, 2): "0",
            (1, 3): "0", (2, 3): "0", (3, 3): "0",
            (1, 4): "0", (2, 4): "0", (3, 4): "0",
            (0, 5): "l1_5",
            (1, 5): "(l3_2 - l6_2)*l5_3",
            (2, 5): "l2_1*l4_1^2*(l3_2 - l6_2)",
            (3, 5): "0",
        }, ({"l1_1": "0", "l1_2": "0", "l1_3": "0", "l1_4": "0", "l3_1": "l6_1", "l5_1": "0", "l5_2": "0"},)),
    )))

    # linear center
    base = {f"{p}_0": "0" for p in _Q_ALL}
    h2 = {"l1_1": "0"}
    h3 = dict(h2, l1_2="0", l5_1="0")
    h4 = dict(h3, l1_3="0", l5_2="0")
    h5 = dict(h4, l1_4="0", l5_3="0", l4_1="5*(l6_1 - l3_1)")
    h6 = dict(h5, l1_5="0", l5_4="0", l4_2="5*(l6_2 - l3_2)")
    cases.append(LemmaCase("q-x", "Q-Linear", "bautin", (base,), (
        Stage(1, {(0, 1): "l1_1", (1, 1): "0", (2, 1): "0", (3, 1): "0"}),
        Stage(2, {(0, 2): "l1_2", (1, 2): f"l5_1*{D1}", (2, 2): "0", (3, 2): "0"}, (h2,)),
        Stage(3, {(0, 3): "l1_3", (1, 3): f"l5_2*{D1}", (2, 3): "0", (3, 3): "0"}, (h3,)),
        Stage(4, {
            (0, 4): "l1_4",
            (1, 4): f"l5_3*{D1}",
            (2, 4): f"l2_1*l4_1*{D1}*(l4_1 + 5*{D1})",
            (3, 4): "0",
        }, (h4,)),
        Stage(5, {
            (0, 5): "l1_5",
            (1, 5): f"l5_4*{D1}",
            (2, 5): f"l2_1*l4_1*{D1}*(l4_2 + 5*(l3_2 - l6_2))",
            (3, 5): "0",
        }, (h5,)),
        Stage(6, {
            (0, 6): "l1_6",
            (1, 6): f"{D1}*l5_5",
            (2, 6): f"l2_1*{D1}^2*(l4_3 + 5*(l3_3 - l6_3))",
            (3, 6): f"l2_1*{D1}^3*(l2_1^2 - l3_1*l6_1 + 2*l6_1^2)",
        }, (h6,)),
    )))
    return cases


# ---------------------------------------------------------------------------
# cubic family


def _cubic_cases() -> list[LemmaCase]:
    cases = []
    # generic Hamiltonian, case 1
    base = {"lam_0": "0", "a_0": "0", "xi_0": "0"}
    stages = []
    for k in (1, 2, 3):
        hyp = _zero_below(["lam", "xi", "a"], k)
        stages.append(Stage(k, {
            (0, k): f"lam_{k}",
            (1, k): f"xi_{k}",
            (2, k): f"nu_0*a_{k}",
            (3, k): f"omega_0*theta_0*a_{k}",
            (4, k): "0",
            (5, k): "0",
        }, (hyp,)))
    cases.append(LemmaCase("c-i-1", "C-GenHam1", "sibirsky", (base,), tuple(stages)))

    # generic Hamiltonian, case 2
    base = {"lam_0": "0", "a_0": "0", "xi_0": "0", "nu_0": "0", "omega_0": "0"}
    cases.append(LemmaCase("c-i-2", "C-GenHam2", "sibirsky", (base,), (
        Stage(1, {(0, 1): "lam_1", (1, 1): "xi_1", (2, 1): "0", (3, 1): "0", (4, 1): "0", (5, 1): "0"}),
        Stage(2, {
            (0, 2): "lam_2",
            (1, 2): "xi_2",
            (2, 2): "a_1*nu_1",
            (3, 2): "theta_0*a_1*omega_1",
            (4, 2): "eta_0*theta_0*a_1^2",
            (5, 2): "4*theta_0*(mu_0^2 + theta_0^2)*a_1^2",
        }, ({"lam_1": "0", "xi_1": "0"},)),
        Stage(3, {
            (0, 3): "lam_3",
            (1, 3): "xi_3",
            (2, 3): "a_2*nu_1",
            (3, 3): "theta_0*a_2*omega_1",
            (4, 3): "0",
            (5, 3): "0",
        }, ({"lam_1": "0", "xi_1": "0", "lam_2": "0", "xi_2": "0", "a_1": "0"},),
            note="odd order 3; rows at order 2 vanish only with a_1 = 0, so i = 2"),
        Stage(4, {
            (0, 4): "lam_4",
            (1, 4): "xi_4",
            (2, 4): "a_2*nu_2",
            (3, 4): "theta_0*a_2*omega_2",
            (4, 4): "eta_0*theta_0*a_3^2",
            (5, 4): "4*theta_0*(mu_0^2 + theta_0^2)*a_3^2",
        }, ({"lam_1": "0", "xi_1": "0", "lam_2": "0", "xi_2": "0", "lam_3": "0", "xi_3": "0",
             "a_1": "0", "nu_1": "0", "omega_1": "0"},),
            note="even order 4 on the branch a_1 = nu_1 = omega_1 = 0 with a_2 free"),
    )))

    # generic symmetric
    base = {"lam_0": "0", "xi_0": "0", "nu_0": "0", "theta_0": "0"}
    stages = []
    for k in (1, 2, 3):
        hyp = _zero_below(["lam", "xi", "nu", "theta"], k)
        stages.append(Stage(k, {
            (0, k): f"lam_{k}",
            (1, k): f"xi_{k}",
            (2, k): f"a_0*nu_{k}",
            (3, k): f"a_0*omega_0*theta_{k}",
            (4, k): f"a_0^2*eta_0*theta_{k}",
            (5, k): f"a_0^2*(4*mu_0^2 - a_0^2)*theta_{k}",
        }, (hyp,)))
    cases.append(LemmaCase("c-ii", "C-GenSymmetric", "sibirsky", (base,), tuple(stages)))

    # generic Darboux; the circle 4(mu^2 + theta^2) = a^2 parametrized rationally
    base = {"lam_0": "0", "xi_0": "0", "nu_0": "0", "omega_0": "0", "eta_0": "0",
            "mu_0": "s*(m^2 - n^2)/2", "theta_0": "s*m*n", "a_0": "s*(m^2 + n^2)"}
    cases.append(LemmaCase("c-iii", "C-GenDarboux", "sibirsky", (base,), (
        Stage(1, {
            (0, 1): "lam_1",
            (1, 1): "xi_1",
            (2, 1): "a_0*nu_1",
            (3, 1): "a_0*theta_0*omega_1",
            (4, 1): "a_0^2*theta_0*eta_1",
            (5, 1): "2*a_0^2*theta_0*(4*mu_0*mu_1 + 4*theta_0*theta_1 - a_0*a_1)",
        }),
    )))

    # Hamiltonian symmetric
    base = {"lam_0": "0", "xi_0": "0", "a_0": "0", "nu_0": "0", "theta_0": "0"}
    cases.append(LemmaCase("c-iv", "C-HamSymmetric", "sibirsky", (base,), (
        Stage(1, {(0, 1): "lam_1", (1, 1): "xi_1", (2, 1): "0", (3, 1): "0", (4, 1): "0", (5, 1): "0"}),
        Stage(2, {
            (0, 2): "lam_2",
            (1, 2): "xi_2",
            (2, 2): "a_1*nu_1",
            (3, 2): "omega_0*a_1*theta_1",
            (4, 2): "0",
            (5, 2): "0",
        }, ({"lam_1": "0", "xi_1": "0"},)),
        Stage(3, {(4, 3): "0", (5, 3): "0"}, (
            {"lam_1": "0", "xi_1": "0", "lam_2": "0", "xi_2": "0", "a_1": "0"},
            {"lam_1": "0", "xi_1": "0", "lam_2": "0", "xi_2": "0", "nu_1": "0", "theta_1": "0"},
            {"lam_1": "0", "xi_1": "0", "lam_2": "0", "xi_2": "0", "nu_1": "0", "omega_0": "0"},
        ), note="three ways for the order-2 rows to vanish"),
    )))

    # symmetric Darboux, both signs of a_0 = +-2 mu_0
    common = {"lam_0": "0", "xi_0": "0", "nu_0": "0", "theta_0": "0", "omega_0": "0", "eta_0": "0"}
    comp_plus = dict(common, a_0="2*mu_0")
    comp_minus = dict(common, a_0="-2*mu_0")
    cases.append(LemmaCase("c-v", "C-SymDarboux", "sibirsky", (comp_plus, comp_minus), (
        Stage(1, {(0, 1): "lam_1", (1, 1): "xi_1", (2, 1): "a_0*nu_1", (3, 1): "0", (4, 1): "0", (5, 1): "0"}),
        Stage(2, {
            (0, 2): "lam_2",
            (1, 2): "xi_2",
            (2, 2): "a_0*nu_2",
            (3, 2): "a_0*theta_1*omega_1",
            (4, 2): "a_0^2*theta_1*eta_1",
            (5, 2): "a_0^2*theta_1*(8*mu_0*mu_1 - 2*a_0*a_1)",
        }, ({"lam_1": "0", "xi_1": "0", "nu_1": "0"},)),
    )))

    # linear center
    base = {f"{p}_0": "0" for p in ("lam", "omega", "theta", "a", "eta", "mu", "xi", "nu")}
    hyp = _zero_below(["lam", "xi"], 5)
    hyp.update(_zero_below(["nu"], 4))
    hyp.update({"omega_1": "0", "omega_2": "0", "eta_1": "0"})
    cases.append(LemmaCase("c-vi", "C-Linear", "sibirsky", (base,), (
        Stage(5, {
            (0, 5): "lam_5",
            (1, 5): "xi_5",
            (2, 5): "a_1*nu_4",
            (3, 5): "a_1*theta_1*omega_3",
            (4, 5): "a_1^2*theta_1*eta_2",
            (5, 5): "a_1^2*theta_1*(4*(mu_1^2 + theta_1^2) - a_1^2)",
        }, (hyp,), note="lower rows vanish through the lowest orders of lam, xi, nu, omega, eta"),
    )))
    return cases


_CASES: list[LemmaCase] | None = None


def all_cases() -> list[LemmaCase]:
    global _CASES
    if _CASES is None:
        _CASES = _quadratic_cases() + _cubic_cases()
    return _CASES


def find_case(key: str) -> LemmaCase:
    key_l = key.lower()
    for c in all_cases():
        if c.key == key_l or c.tag.lower() == key_l:
            return c
    raise KeyError(f"unknown case {key!r}")


# ---------------------------------------------------------------------------
# checking


@dataclass
class EntryCheck:
    component: int
    j: int
    r: int
    branch: int
    expected: str
    computed: str
    verdict: str  # "exact", "multiple", "mismatch"
    factor: Fraction | None = None
    recorded_only: bool = False

    @property
    def ok(self) -> bool:
        return self.verdict == "exact" or self.recorded_only

    def to_json(self) -> dict:
        out = {
            "entry": f"v{2 * self.j + 1},{self.r}",
            "component": self.component,
            "branch": self.branch,
            "expected": self.expected,
            "computed": self.computed,
            "verdict": self.verdict,
        }
        if self.factor is not None:
            out["factor"] = str(self.factor)
        if self.recorded_only:
            out["recorded_only"] = True
        return out


@dataclass
class CaseReport:
    key: str
    tag: str
    entries: list[EntryCheck] = field(default_factory=list)
    normalization: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.ok for e in self.entries)

    def discrepancies(self) -> list[EntryCheck]:
        return [e for e in self.entries if e.verdict != "exact"]

    def to_json(self) -> dict:
        return {
            "case": self.key,
            "tag": self.tag,
            "passed": self.passed,
            "normalization_factors": self.normalization,
            "entries": [e.to_json() for e in self.entries],
        }


_VALUES_CACHE: dict[str, FocalValues] = {}


def reference_focal_values(family: str) -> tuple[FocalValues, list]:
    """Focal values re-expressed through the printed reference expressions."""
    fam: SystemFamily = bautin() if family == "bautin" else sibirsky()
    count = 4 if family == "bautin" else 6
    vals = focal_values(fam, count)
    aligned, report = align_to_reference(vals, reference_values(fam))
    return aligned, report


def _aligned(family: str) -> tuple[FocalValues, list]:
    if family not in _VALUES_CACHE:
        _VALUES_CACHE[family] = reference_focal_values(family)
    return _VALUES_CACHE[family]


def _subs_text(sub: Sub) -> dict[str, MultiPoly]:
    return {k: parse(v) for k, v in sub.items()}


def _apply(p: MultiPoly, subs: list[dict[str, MultiPoly]]) -> MultiPoly:
    for sub in subs:
        ring = [v for v in p.vars if v not in sub]
        for img in sub.values():
            ring.extend(v for v in img.vars if v not in ring)
        p = p.subs(sub, ring).shrink()
    return p


def _compare(computed: MultiPoly, expected: MultiPoly) -> tuple[str, Fraction | None]:
    from .poly import unify

    c, e = unify(computed, expected)
    if c == e:
        return "exact", None
    if c.is_zero() or e.is_zero():
        return "mismatch", None
    exp0, coef = e.leading_term()
    other = c.terms.get(exp0)
    if other is not None:
        f = other / coef
        if c == e.scale(f):
            return "multiple", f
    return "mismatch", None


def check_case(case: LemmaCase, extra_hypotheses: Callable | None = None) -> CaseReport:
    vals, align = _aligned(case.family)
    rep = CaseReport(case.key, case.tag)
    rep.normalization = [f"v{2 * a.index + 1}: factor {a.factor} ({a.method})" for a in align]
    params = vals.family.params
    for ci, base in enumerate(case.base):
        base_sub = _subs_text(base)
        for stage in case.stages:
            for bi, branch in enumerate(stage.branches):
                hyp = _subs_text(branch)
                series = ParamSeries.symbolic(params, stage.order, tail="zero")
                # hypotheses first (they may mention base symbols), then the base point
                series = series.subs(hyp).subs(base_sub)
                tab = expand(vals, series, stage.order)
                for (j, r), text in stage.expected.items():
                    comp = tab.rows[j][r].shrink()
                    exp = _apply(parse(text), [hyp, base_sub])
                    verdict, factor = _compare(comp, exp)
                    rep.entries.append(EntryCheck(
                        ci, j, r, bi, text, str(comp), verdict, factor, (j, r) in stage.recorded_only
                    ))
    return rep


def check_all(only: str | None = None) -> list[CaseReport]:
    cases = all_cases() if only is None else [find_case(only)]
    return [check_case(c) for c in cases]
