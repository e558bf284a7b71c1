"""Job configuration: a single JSON document, validated strictly.

Rationals are written as strings ``"p/q"`` (or integers) and parsed exactly;
unknown keys anywhere are rejected.  :func:`resolve` fills every default so
the echoed configuration is complete.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any


class ConfigError(ValueError):
    pass


DEFAULTS: dict[str, Any] = {
    "family": {"kind": "bautin", "point": None, "rhs_x": None, "rhs_y": None, "params": None, "trace_param": None},
    "series": {},
    "numeric": {
        "tolerances": {"rtol": 1e-10, "atol": 1e-12, "map_rtol": 1e-13, "map_atol": 1e-15,
                       "event_tol": 1e-12, "max_time": 1000.0, "max_evals": 200000},
        "grid": {"n": 20, "lo": 0.05, "hi": 0.95},
        "ladder": {"m0": 6, "steps": 6, "adaptive": True},
        "H": None,
        "V": None,
        "method": "both",
        "k_hint": None,
        "eps": "1/1000",
        "h_star": None,
    },
    "task": {"count": None, "case": None, "only": None, "numeric": False, "k": None, "samples": 20},
    "seed": 0,
}


def rational(value: Any, where: str) -> Fraction:
    if isinstance(value, bool) or isinstance(value, float):
        raise ConfigError(f"{where}: rationals must be integers or 'p/q' strings, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"{where}: not a rational: {value!r}") from None
    raise ConfigError(f"{where}: not a rational: {value!r}")


def _merge(defaults: dict, given: dict, path: str) -> dict:
    if not isinstance(given, dict):
        raise ConfigError(f"{path or 'config'}: expected an object")
    out = {}
    for key in given:
        if key not in defaults:
            raise ConfigError(f"unknown key {path + key!r}")
    for key, dv in defaults.items():
        if key in given:
            gv = given[key]
            if isinstance(dv, dict) and dv and key not in ("series",):
                out[key] = _merge(dv, gv, f"{path}{key}.")
            else:
                out[key] = gv
        else:
            out[key] = json.loads(json.dumps(dv))
    return out


def resolve(data: dict | None) -> dict:
    """Validate and apply defaults."""
    cfg = _merge(DEFAULTS, data or {}, "")
    fam = cfg["family"]
    if fam["kind"] not in ("bautin", "sibirsky", "custom"):
        raise ConfigError(f"family.kind must be bautin, sibirsky or custom, got {fam['kind']!r}")
    if fam["point"] is not None:
        if not isinstance(fam["point"], dict):
            raise ConfigError("family.point must be an object of parameter values")
        fam["point"] = {k: str(rational(v, f"family.point.{k}")) for k, v in fam["point"].items()}
    series = cfg["series"]
    if not isinstance(series, dict):
        raise ConfigError("series must be an object")
    clean = {}
    for p, row in series.items():
        if not isinstance(row, dict):
            raise ConfigError(f"series.{p} must map orders to values")
        clean[p] = {}
        for l, v in row.items():
            try:
                ell = int(l)
            except ValueError:
                raise ConfigError(f"series.{p}: order {l!r} is not an integer") from None
            if ell < 0:
                raise ConfigError(f"series.{p}: negative order {ell}")
            clean[p][str(ell)] = v if isinstance(v, str) and not _is_rational_text(v) else str(rational(v, f"series.{p}.{l}"))
    cfg["series"] = clean
    num = cfg["numeric"]
    if num["method"] not in ("line_integral", "eps_ladder", "both"):
        raise ConfigError("numeric.method must be line_integral, eps_ladder or both")
    num["eps"] = str(rational(num["eps"], "numeric.eps"))
    if not isinstance(cfg["seed"], int) or isinstance(cfg["seed"], bool):
        raise ConfigError("seed must be an integer")
    return cfg


def _is_rational_text(s: str) -> bool:
    try:
        Fraction(s.strip())
        return True
    except (ValueError, ZeroDivisionError):
        return False


def load(path: str | Path | None) -> dict:
    if path is None:
        return resolve({})
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return resolve(data)
