"""Command-line entry point.

Exit codes: 0 ok, 1 suite/verification failure, 2 invalid input,
3 numerical failure, 4 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import config as cfgmod
from .families import NormalFormError, SystemFamily, by_name, custom
from .poly import ParseError, VariableMismatch

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC, EXIT_INTERNAL = 0, 1, 2, 3, 4


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# helpers


def _family(cfg: dict, name: str | None = None) -> SystemFamily:
    fam = cfg["family"]
    kind = name or fam["kind"]
    if kind == "custom":
        if not (fam["rhs_x"] and fam["rhs_y"] and fam["params"]):
            raise UsageError("a custom family needs family.rhs_x, family.rhs_y and family.params")
        return custom(fam["rhs_x"], fam["rhs_y"], fam["params"], fam["trace_param"])
    return by_name(kind)


def _point(cfg: dict, fam: SystemFamily, text: str | None) -> dict[str, Fraction]:
    if text:
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != len(fam.params):
            raise UsageError(f"--point needs {len(fam.params)} values ({', '.join(fam.params)})")
        return {p: cfgmod.rational(v, f"--point {p}") for p, v in zip(fam.params, parts)}
    pt = cfg["family"]["point"]
    if pt is None:
        raise UsageError("no parameter point given (use --point or family.point)")
    missing = [p for p in fam.params if p not in pt]
    extra = [p for p in pt if p not in fam.params]
    if missing or extra:
        raise UsageError(f"family.point must set exactly {', '.join(fam.params)}")
    return {p: Fraction(pt[p]) for p in fam.params}


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n"


class Output:
    def __init__(self, args, cfg):
        self.args = args
        self.cfg = cfg
        self.out = Path(args.out) if args.out else None
        if self.out:
            self.out.mkdir(parents=True, exist_ok=True)

    def emit(self, verb: str, result: dict, text: str, csv_files: dict[str, str] | None = None):
        payload = {"command": verb, "config": self.cfg, "result": result}
        fmt = self.args.format
        if fmt == "json":
            sys.stdout.write(_dump(payload))
        elif fmt == "csv":
            if not csv_files:
                raise UsageError(f"{verb} has no CSV output")
            for body in csv_files.values():
                sys.stdout.write(body)
        else:
            sys.stdout.write(text.rstrip("\n") + "\n")
        if self.out:
            (self.out / f"{verb}.json").write_text(_dump(payload))
            (self.out / f"{verb}.txt").write_text(text.rstrip("\n") + "\n")
            for name, body in (csv_files or {}).items():
                (self.out / name).write_text(body)


# ---------------------------------------------------------------------------
# verbs


def cmd_focal(args, cfg, out: Output) -> int:
    from .liapunov import align_to_reference, focal_values, reference_values

    fam = _family(cfg, args.family)
    n = args.n or cfg["task"]["count"] or {"bautin": 4, "sibirsky": 6}.get(fam.kind.value)
    if not n:
        raise UsageError("give the number of focal values with -n or task.count")
    vals = focal_values(fam, int(n))
    result = vals.to_json()
    lines = [f"v{2 * j + 1} = {v}" for j, v in enumerate(vals.values)]
    ref = reference_values(fam)
    if ref is not None and len(ref) >= n:
        aligned, report = align_to_reference(vals, ref[:n])
        result["reference_alignment"] = [
            {"value": f"v{2 * a.index + 1}", "factor": str(a.factor), "method": a.method, "detail": a.detail}
            for a in report
        ]
        lines.append("")
        lines += [f"v{2 * a.index + 1}: computed = {a.factor} * reference ({a.method})" for a in report]
        if args.oracle:
            from .melnum.taylor import oracle_check

            orc = oracle_check(aligned, args.oracle, cfg["seed"])
            result["oracle"] = orc.to_json()
            lines.append(f"return-map oracle: worst relative {orc.worst_relative:.2e} "
                         f"over {args.oracle} points per value")
    out.emit("focal", result, "\n".join(lines))
    return EXIT_OK


def cmd_classify(args, cfg, out: Output) -> int:
    from .essential import classify

    fam = _family(cfg, args.family)
    case = classify(fam, _point(cfg, fam, args.point))
    text = f"{case.tag}\n" + "\n".join(f"  {k}: {v}" for k, v in case.witness.items())
    out.emit("classify", case.to_json(), text)
    return EXIT_OK


def cmd_plan(args, cfg, out: Output) -> int:
    from .essential import classify, essential_plan, verify_plan

    key = args.case or cfg["task"]["case"]
    if key:
        plan = essential_plan(key)
    else:
        fam = _family(cfg, args.family)
        plan = essential_plan(classify(fam, _point(cfg, fam, args.point)))
    rep = verify_plan(plan, seed=cfg["seed"])
    result = {"plan": plan.to_json(), "verification": rep.to_json()}
    lines = [f"{plan.tag}: k* = {plan.k_star}, essential parameters {', '.join(plan.essential_params)}"]
    lines += [f"  v{2 * j + 1}: {c}" for j, c in plan.form().items()]
    lines.append(f"verification: {'PASS' if rep.passed else 'FAIL'}")
    lines += [f"  failure: {f}" for f in rep.failures] + [f"  note: {n}" for n in rep.notes]
    out.emit("plan", result, "\n".join(lines))
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_expand(args, cfg, out: Output) -> int:
    from .epsseries import ParamSeries, expand, melnikov_order
    from .essential import essential_plan
    from .lemmas import reference_focal_values
    from .liapunov import focal_values

    r_max = args.order or cfg["task"]["k"] or 8
    key = args.case or cfg["task"]["case"]
    if key:
        plan = essential_plan(key)
        plan.k_star = r_max
        fam = plan.family()
        series = plan.series()
    else:
        fam = _family(cfg, args.family)
        table = {p: {int(l): v for l, v in row.items()} for p, row in cfg["series"].items()}
        if cfg["family"]["point"] is not None:
            pt = _point(cfg, fam, None)
            for p in fam.params:
                table.setdefault(p, {}).setdefault(0, str(pt[p]))
        if not table:
            raise UsageError("expand needs a series table (series) or --case")
        series = ParamSeries.from_table(fam.params, table, r_max, tail="zero")
    if fam.kind.value in ("bautin", "sibirsky") and args.values == "reference":
        vals, _ = reference_focal_values(fam.kind.value)
    else:
        n = cfg["task"]["count"] or {"bautin": 4, "sibirsky": 6}.get(fam.kind.value)
        if not n:
            raise UsageError("give task.count for a custom family")
        vals = focal_values(fam, int(n))
    tab = expand(vals, series, r_max)
    order = melnikov_order(tab)
    result = {"table": tab.to_json(), "melnikov_order": order, "flags": tab.flags, "values": args.values}
    lines = [f"v{2 * j + 1},{r} = {row[r]}" for r in range(r_max + 1) for j, row in enumerate(tab.rows)
             if not row[r].is_zero()]
    lines.append(f"first nonzero order: {order}")
    out.emit("expand", result, "\n".join(lines))
    return EXIT_OK


def _numeric_flow(cfg, args):
    from .melnum.systems import EXAMPLE_H, EXAMPLE_POINT, EXAMPLE_V, series_flow

    fam = _family(cfg, args.family)
    pt = _point(cfg, fam, args.point)
    num = cfg["numeric"]
    H, V = num["H"], num["V"]
    if H is None and V is None and fam.kind.value == "bautin" and pt == {k: Fraction(v) for k, v in EXAMPLE_POINT.items()}:
        H, V = EXAMPLE_H, EXAMPLE_V
    series = {p: {int(l): cfgmod.rational(v, f"series.{p}.{l}") for l, v in row.items()}
              for p, row in cfg["series"].items()}
    if not series:
        raise UsageError("numeric commands need a numeric perturbation series")
    return series_flow(fam, pt, series, H, V), fam, pt, series


def _tolerances(cfg):
    from .melnum.flow import Tolerances

    return Tolerances.from_mapping(cfg["numeric"]["tolerances"])


def _ladder(cfg):
    from .melnum.melnikov import Ladder

    lad = cfg["numeric"]["ladder"]
    return Ladder(int(lad["m0"]), int(lad["steps"])), bool(lad["adaptive"])


def _k_hint(cfg, fam, pt, series) -> int:
    if cfg["numeric"]["k_hint"]:
        return int(cfg["numeric"]["k_hint"])
    if fam.kind.value not in ("bautin", "sibirsky"):
        return 1
    from .epsseries import ParamSeries, expand, melnikov_order
    from .lemmas import reference_focal_values

    top = max((l for row in series.values() for l in row), default=1)
    table = {p: {0: str(pt[p]), **{l: str(v) for l, v in series.get(p, {}).items()}} for p in fam.params}
    vals, _ = reference_focal_values(fam.kind.value)
    order = melnikov_order(expand(vals, ParamSeries.from_table(fam.params, table, max(top, 6)), max(top, 6)))
    return order if isinstance(order, int) and order >= 1 else 1


def cmd_melnikov(args, cfg, out: Output) -> int:
    from .melnum.melnikov import compare_curves, h_grid, ladder_curve, m1_curve
    from .melnum.zeros import find_zeros

    flow, fam, pt, series = _numeric_flow(cfg, args)
    tol = _tolerances(cfg)
    grid = cfg["numeric"]["grid"]
    hs = h_grid(int(grid["n"]), float(grid["lo"]), float(grid["hi"]), margin=0.0)
    method = args.method or cfg["numeric"]["method"]
    curves = {}
    if method in ("line_integral", "both"):
        curves["line_integral"] = m1_curve(flow, hs, tol=tol)
    if method in ("eps_ladder", "both"):
        ladder, _ = _ladder(cfg)
        k = _k_hint(cfg, fam, pt, series)
        curves["eps_ladder"] = ladder_curve(flow, hs, k, ladder, tol)
    result = {}
    csv_files = {}
    lines = []
    for name, c in curves.items():
        find_zeros(c)
        result[name] = c.to_json()
        csv_files[f"melnikov_{name}.csv"] = c.to_csv()
        lines.append(f"{name} (k={c.order}): zeros " + (", ".join(f"{z.h:.10g} (mult {z.multiplicity})"
                                                            for z in c.zeros) or "none"))
    if len(curves) == 2:
        result["agreement"] = compare_curves(curves["line_integral"], curves["eps_ladder"])
        lines.append(f"max relative difference: {result['agreement']['max_relative_difference']:.3g}")
    out.emit("melnikov", result, "\n".join(lines), csv_files)
    return EXIT_OK


def cmd_bifurcate(args, cfg, out: Output) -> int:
    from .melnum.bifurcation import verify_bifurcation
    from .melnum.melnikov import h_grid, m1_curve
    from .melnum.zeros import find_zeros

    flow, *_ = _numeric_flow(cfg, args)
    tol = _tolerances(cfg)
    eps = float(Fraction(args.eps) if args.eps else Fraction(cfg["numeric"]["eps"]))
    targets = args.h_star or cfg["numeric"]["h_star"]
    if not targets:
        grid = cfg["numeric"]["grid"]
        curve = m1_curve(flow, h_grid(int(grid["n"]) * 5, float(grid["lo"]), float(grid["hi"]), margin=0.0), tol=tol)
        targets = [z.h for z in find_zeros(curve) if z.multiplicity == 1]
    reports = [verify_bifurcation(flow, float(h), eps, tol) for h in targets]
    lines = [f"h* = {r.h_star:.10g}: {r.verdict}" + (f" at h = {r.h_cycle:.10g}, P' = {r.derivative:.10g} ({r.stability})"
                                                      if r.found else "") for r in reports]
    out.emit("bifurcate", {"reports": [r.to_json() for r in reports]}, "\n".join(lines) or "no simple zeros")
    return EXIT_OK


def cmd_verify(args, cfg, out: Output) -> int:
    from .suite import run_suite

    only = args.only or cfg["task"]["only"]
    numeric = args.numeric or cfg["task"]["numeric"]
    rep = run_suite(only, numeric, cfg["seed"])
    out.emit("verify-claims", rep.to_json(), rep.to_text())
    return EXIT_OK if rep.passed else EXIT_FAIL


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON job configuration")
    common.add_argument("--seed", type=int, help="random seed (overrides the config)")
    common.add_argument("--out", help="directory for output files")
    common.add_argument("--format", choices=("json", "csv", "text"), default="text")

    parser = argparse.ArgumentParser(prog="bautin", description="Focal values, essential perturbations "
                                     "and Melnikov functions for planar centers.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("focal", parents=[common], help="focal values of a family")
    p.add_argument("--family")
    p.add_argument("-n", type=int)
    p.add_argument("--oracle", type=int, metavar="POINTS", default=0,
                   help="check against the numeric return map at this many points per value")
    p.set_defaults(func=cmd_focal)

    p = sub.add_parser("classify", parents=[common], help="center case of a parameter point")
    p.add_argument("--family")
    p.add_argument("--point", help="comma-separated rationals in parameter order")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("plan", parents=[common], help="essential perturbation plan and its verification")
    p.add_argument("--family")
    p.add_argument("--point")
    p.add_argument("--case", help="plan key (q-i .. q-x, c-i-1, c-i-2, c-ii .. c-vi) or case tag")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("expand", parents=[common], help="eps-expansion of the focal values")
    p.add_argument("--family")
    p.add_argument("--case")
    p.add_argument("--order", type=int)
    p.add_argument("--values", choices=("reference", "computed"), default="reference")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("melnikov", parents=[common], help="numeric Melnikov function on an h-grid")
    p.add_argument("--family")
    p.add_argument("--point")
    p.add_argument("--method", choices=("line_integral", "eps_ladder", "both"))
    p.set_defaults(func=cmd_melnikov)

    p = sub.add_parser("bifurcate", parents=[common], help="limit cycles from simple zeros of M1")
    p.add_argument("--family")
    p.add_argument("--point")
    p.add_argument("--eps")
    p.add_argument("--h-star", type=float, action="append")
    p.set_defaults(func=cmd_bifurcate)

    p = sub.add_parser("verify-claims", aliases=["verify-paper"], parents=[common],
                       help="run every lemma, plan and range check")
    p.add_argument("--only")
    p.add_argument("--numeric", action="store_true")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    from .essential import NotACenter, UnclassifiedDegenerate
    from .melnum.expr import ExpressionError
    from .melnum.flow import FlowSpecError, NumericError

    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = cfgmod.load(args.config)
        if args.seed is not None:
            cfg["seed"] = args.seed
        return args.func(args, cfg, Output(args, cfg))
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (cfgmod.ConfigError, UsageError, NotACenter, UnclassifiedDegenerate, ParseError, VariableMismatch,
            NormalFormError, FlowSpecError, ExpressionError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"invalid input: {msg}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
