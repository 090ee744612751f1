"""Experiment configuration: TOML with one ``[run]`` table and one table per module.

Example::

    [run]
    n_paths = 5
    n_steps = 1000
    seed = 7
    format = "csv"

    [bridge]
    kind = "pinned"
    start = 0.0
    pin = 0.0

Unknown tables and keys are rejected.  :func:`validate` returns every
violation at once; :func:`resolve` returns the typed, defaulted config or
raises :class:`ConfigError`.
"""

from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

REQUIRED = object()


class ConfigError(ValueError):
    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


class ConfigParseError(ConfigError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__([f"parse error: {where}{message}"])
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Field:
    kind: str  # float | int | str | bool | floats
    default: Any = REQUIRED
    check: Callable[[Any], str | None] | None = None
    choices: tuple | None = None


def positive(v):
    return None if v > 0 else "must be > 0"


def non_negative(v):
    return None if v >= 0 else "must be >= 0"


def unit_open(v):
    return None if 0 < v < 1 else "must lie in (0, 1)"


def below_one(v):
    return None if 0 < v < 1 else "must lie in (0, 1): the bridge drift is singular at t = 1"


def unit_half_open(v):
    return None if 0 < v <= 1 else "must lie in (0, 1]"


def all_positive(v):
    return None if all(x > 0 for x in v) else "every entry must be > 0"


def volatility(v):
    return None if v > 0 else "must be > 0: with zero volatility the price never crashes"


RUN = {
    "subcommand": Field("str", None),
    "n_paths": Field("int", 1000, positive),
    "n_steps": Field("int", 1000, positive),
    "seed": Field("int", 0, non_negative),
    "format": Field("str", "json", choices=("csv", "json")),
    "antithetic": Field("bool", False),
}

SECTIONS: dict[str, tuple[str, dict[str, Field]]] = {
    "simulate-bridge": (
        "bridge",
        {
            "kind": Field("str", "pinned", choices=("pinned", "paper_sde", "doob")),
            "x": Field("float", 0.0, non_negative),
            "start": Field("float", 0.0),
            "pin": Field("float", 0.0),
            "eps": Field("float", 1e-4, unit_open),
        },
    ),
    "girsanov": (
        "girsanov",
        {
            "x": Field("float", 0.3),
            "variant": Field("str", "standard", choices=("standard", "paper_literal")),
            "horizon": Field("float", 0.75, below_one),
            "times": Field("floats", [0.25, 0.5, 0.75]),
            "functional": Field("str", "one", choices=("one", "bhat", "bhat_sq")),
        },
    ),
    "local-time": (
        "local_time",
        {
            "process": Field("str", "brownian", choices=("brownian", "bridge")),
            "levels": Field("floats", [0.0]),
            "times": Field("floats", None),
            "horizon": Field("float", 1.0, positive),
            "epsilon": Field("float", 1e-2, positive),
            "tols": Field("floats", [1e-2, 5e-3], all_positive),
        },
    ),
    "crash": (
        "crash",
        {
            "s0": Field("float", 100.0, positive),
            "mu": Field("float", 0.05),
            "sigma": Field("float", 0.2, volatility),
            "s_crash": Field("float", 80.0, positive),
            "payout": Field("float", 0.0, non_negative),
            "horizon": Field("float", 1.0, positive),
            "t": Field("float", 1.0, positive),
        },
    ),
    "price-barrier": (
        "barrier",
        {
            "s0": Field("float", 100.0, positive),
            "strike": Field("float", 100.0, positive),
            "barrier": Field("float", 80.0, positive),
            "rate": Field("float", 0.05),
            "dividend_yield": Field("float", 0.0, non_negative),
            "sigma": Field("float", 0.2, volatility),
            "maturity": Field("float", 1.0, positive),
            "side": Field("str", "down_in_put", choices=("down_in_put", "down_out_put", "vanilla_put")),
            "mc": Field("bool", True),
        },
    ),
    "price-swaption": (
        "swaption",
        {
            "forward": Field("float", 0.05),
            "strike_rate": Field("float", 0.05, positive),
            "sigma": Field("float", 0.2, positive),
            "expiry": Field("float", 1.0, positive),
            "discount": Field("float", 1.0, unit_half_open),
            "variant": Field("str", "standard_black", choices=("standard_black", "paper_literal")),
            "mc": Field("bool", True),
        },
    ),
    "scenario": (
        "scenario",
        {
            "r": Field("float", 0.03, positive),
            "c": Field("float", -0.02),
            "beta1": Field("floats", [1.5]),
            "payout": Field("float", 0.0, non_negative),
            "factor": Field("float", 1.0, positive),
        },
    ),
    "kfactor-sim": (
        "kfactor",
        {
            "alpha": Field("float", 0.0),
            "betas": Field("floats", [1.0]),
            "factor_mu": Field("floats", [0.08]),
            "factor_sigma": Field("floats", [0.2], all_positive),
            "delta": Field("float", 0.05, non_negative),
            "rate": Field("float", 0.03),
            "dt": Field("float", 1 / 252, positive),
            "n_trials": Field("int", 100, positive),
            "level": Field("float", 0.05, unit_open),
        },
    ),
}

SUBCOMMANDS = tuple(SECTIONS)


def parse_text(text: str) -> dict:
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        col = getattr(exc, "colno", None)
        msg = getattr(exc, "msg", str(exc))
        if line is None:
            # older tomli only embeds the position in the message
            m = re.search(r"line (\d+), column (\d+)", str(exc))
            if m:
                line, col = int(m.group(1)), int(m.group(2))
                msg = str(exc).split(" (at line")[0]
        raise ConfigParseError(msg, line, col) from None


def load(path: str | Path) -> dict:
    return parse_text(Path(path).read_text(encoding="utf-8"))


def _coerce(kind: str, value: Any) -> tuple[Any, str | None]:
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return None, "must be a number"
        if not math.isfinite(value):
            return None, "must be finite"
        return float(value), None
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            return None, "must be an integer"
        return value, None
    if kind == "str":
        return (value, None) if isinstance(value, str) else (None, "must be a string")
    if kind == "bool":
        return (value, None) if isinstance(value, bool) else (None, "must be true or false")
    if kind == "floats":
        items = value if isinstance(value, list) else [value]
        out = []
        for v in items:
            c, err = _coerce("float", v)
            if err:
                return None, "must be a number or a list of numbers"
            out.append(c)
        if not out:
            return None, "must not be empty"
        return out, None
    raise AssertionError(kind)


def _table(name: str, raw: Any, schema: dict[str, Field], violations: list[str]) -> dict:
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        violations.append(f"[{name}] must be a table")
        return {}
    out = {}
    for key in raw:
        if key not in schema:
            violations.append(f"{name}.{key}: unknown key")
    for key, f in schema.items():
        if key not in raw:
            if f.default is REQUIRED:
                violations.append(f"{name}.{key}: missing")
            else:
                out[key] = f.default
            continue
        value, err = _coerce(f.kind, raw[key])
        if err is None and f.choices is not None and value not in f.choices:
            err = f"must be one of {', '.join(map(str, f.choices))}"
        if err is None and f.check is not None:
            err = f.check(value)
        if err:
            violations.append(f"{name}.{key}: {err}")
        else:
            out[key] = value
    return out


def _cross_checks(subcommand: str, sec: dict, run: dict) -> list[str]:
    from .crash import CrashSpec
    from .derivatives.barrier import BarrierOptionSpec
    from .paths import GbmParams

    v = []
    if subcommand == "crash":
        if "s_crash" in sec and "s0" in sec and sec["s_crash"] >= sec["s0"]:
            v.append("crash.s_crash: crash level must lie below s0 (a crash is a down-crossing)")
        if "t" in sec and "horizon" in sec and sec["t"] > sec["horizon"]:
            v.append("crash.t: must not exceed the horizon")
        if not v and len(sec) == len(SECTIONS["crash"][1]):
            try:
                CrashSpec(GbmParams(sec["mu"], sec["sigma"], sec["s0"]), sec["s_crash"], sec["payout"], sec["horizon"])
            except ValueError as exc:
                v.append(f"crash: {exc}")
    elif subcommand == "price-barrier":
        if {"barrier", "s0"} <= sec.keys() and sec["barrier"] >= sec["s0"]:
            v.append("barrier.barrier: must lie below s0 (otherwise the put is already knocked in)")
        if {"barrier", "strike"} <= sec.keys() and sec["barrier"] >= sec["strike"]:
            v.append("barrier.barrier: must lie below the strike")
        if not v and len(sec) == len(SECTIONS["price-barrier"][1]):
            try:
                BarrierOptionSpec(
                    GbmParams(sec["rate"], sec["sigma"], sec["s0"]),
                    sec["strike"], sec["barrier"], sec["rate"], sec["maturity"],
                    sec["dividend_yield"], sec["side"],
                )
            except ValueError as exc:
                v.append(f"barrier: {exc}")
    elif subcommand == "price-swaption":
        if "forward" in sec and sec["forward"] <= 0:
            v.append("swaption.forward: must be > 0 (ln(F / r_T) is undefined otherwise)")
    elif subcommand == "girsanov":
        if "times" in sec and "horizon" in sec:
            if any(not 0 < t <= sec["horizon"] for t in sec["times"]):
                v.append("girsanov.times: every time must lie in (0, horizon]")
    elif subcommand == "local-time":
        if sec.get("process") == "bridge" and sec.get("horizon", 0) >= 1:
            v.append("local_time.horizon: must be < 1 for the bridge process")
        if sec.get("times") and "horizon" in sec:
            if any(not 0 < t <= sec["horizon"] for t in sec["times"]):
                v.append("local_time.times: every time must lie in (0, horizon]")
    elif subcommand == "kfactor-sim":
        k = {len(sec[n]) for n in ("betas", "factor_mu", "factor_sigma") if n in sec}
        if len(k) > 1:
            v.append("kfactor: betas, factor_mu and factor_sigma must have the same length")
        if "n_steps" in run and run["n_steps"] < len(sec.get("betas", [])) + 2:
            v.append("run.n_steps: need at least K + 2 observations")
    elif subcommand == "scenario":
        if "c" in sec and sec["c"] == 0:
            v.append("scenario.c: must be non-zero")
    return v


def infer_subcommand(raw: dict) -> str | None:
    run = raw.get("run") if isinstance(raw.get("run"), dict) else {}
    if isinstance(run.get("subcommand"), str):
        return run["subcommand"]
    present = [s for s, (table, _) in SECTIONS.items() if table in raw]
    return present[0] if len(present) == 1 else None


def validate(raw: dict, subcommand: str | None = None) -> list[str]:
    """All violations of ``raw`` against the schema for ``subcommand``."""
    violations: list[str] = []
    subcommand = subcommand or infer_subcommand(raw)
    if subcommand not in SECTIONS:
        return [f"run.subcommand: unknown or missing subcommand {subcommand!r}"]
    table, schema = SECTIONS[subcommand]
    for key in raw:
        if key not in ("run", table):
            violations.append(f"[{key}]: unknown table for subcommand {subcommand}")
    run = _table("run", raw.get("run"), RUN, violations)
    if run.get("subcommand") not in (None, subcommand):
        violations.append(f"run.subcommand: config is for {run['subcommand']!r}, not {subcommand!r}")
    sec = _table(table, raw.get(table), schema, violations)
    violations.extend(_cross_checks(subcommand, sec, run))
    return violations


def resolve(raw: dict, subcommand: str | None = None) -> dict:
    """Typed config with defaults filled in: ``{"subcommand", "run", <table>}``."""
    subcommand = subcommand or infer_subcommand(raw)
    violations = validate(raw, subcommand)
    if violations:
        raise ConfigError(violations)
    table, schema = SECTIONS[subcommand]
    scratch: list[str] = []
    run = _table("run", raw.get("run"), RUN, scratch)
    run["subcommand"] = subcommand
    return {"subcommand": subcommand, "run": run, table: _table(table, raw.get(table), schema, scratch)}
