"""Batch experiment runner.

Every subcommand reads an optional TOML config (see :mod:`alphabridge.config`),
applies ``--seed`` and ``--format`` overrides, runs one experiment and writes
one document to ``--out`` (or stdout).  With ``--out`` a manifest
``<out>.manifest.json`` is written beside the output.

Exit status:

====  ==========================================
0     success
2     bad command line (argparse)
3     invalid config (parse error or violations)
4     runtime failure inside a module
5     output path not writable
====  ==========================================
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import time
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__, config
from .crash import CrashSpec, crash_report
from .derivatives import barrier as barrier_mod
from .derivatives import swaption as swaption_mod
from .derivatives.systemic import alpha_zero_beta, scenario_classify, scenario_signs
from .localtime import local_time_sweep
from .measure import GirsanovSpec, q_expectation
from .multifactor import model_from_lists, run_alpha_trials
from .paths import (
    BridgeSpec,
    GbmParams,
    TimeGrid,
    bridge_paper_sde_paths,
    bridge_pinned_paths,
    bridge_terminal_value,
    doob_bridge_paths,
)
from .rng import GENERATOR_ID

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_RUNTIME = 4
EXIT_OUTPUT = 5


class OutputError(OSError):
    pass


# --------------------------------------------------------------------------
# rendering


def _plain(obj: Any) -> Any:
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def to_json(doc: Any) -> str:
    return json.dumps(_plain(doc), sort_keys=True, indent=2, allow_nan=False, ensure_ascii=False) + "\n"


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return repr(v) if math.isfinite(v) else ""
    return str(v)


def to_csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "_"))
        else:
            out[key] = v
    return out


def record_csv(doc: dict) -> str:
    flat = _flatten(_plain(doc))
    keys = sorted(flat)
    return to_csv(keys, [[flat[k] for k in keys]])


# --------------------------------------------------------------------------
# subcommands: each returns {"main": text, extra-suffix: text, ...}


def run_simulate_bridge(cfg: dict, fmt: str) -> dict[str, str]:
    run, sec = cfg["run"], cfg["bridge"]
    n, seed = run["n_paths"], run["seed"]
    grid = TimeGrid.bridge(run["n_steps"], sec["eps"])
    kind = sec["kind"]
    if kind == "pinned":
        values = bridge_pinned_paths(sec["start"], sec["pin"], grid, n, seed)
        pin = bridge_terminal_value(kind, sec["pin"])
    elif kind == "paper_sde":
        values = bridge_paper_sde_paths(BridgeSpec(sec["x"]), grid, n, seed)
        pin = bridge_terminal_value(kind, sec["pin"])
    else:
        grid, values = doob_bridge_paths(grid, n, seed)
        pin = 0.0
    if fmt == "csv":
        header = ["t"] + [f"path_{i}" for i in range(n)]
        rows = [[t] + list(values[:, j]) for j, t in enumerate(grid.points)]
        if pin is not None:
            # the simulated grid stops short of 1; append the value defined there
            rows.append([1.0] + [pin] * n)
        return {"main": to_csv(header, rows)}
    return {
        "main": to_json(
            {
                "kind": kind,
                "seed": seed,
                "generator": GENERATOR_ID,
                "t": grid.points,
                "paths": values,
                "terminal_at_one": pin,
            }
        )
    }


_FUNCTIONALS: dict[str, Callable] = {
    "one": lambda grid, v: np.ones(v.shape[0]),
    "bhat": lambda grid, v: v[:, -1],
    "bhat_sq": lambda grid, v: v[:, -1] ** 2,
}


def run_girsanov(cfg: dict, fmt: str) -> dict[str, str]:
    run, sec = cfg["run"], cfg["girsanov"]
    base = TimeGrid.uniform(run["n_steps"], sec["horizon"]).points
    points = np.unique(np.concatenate([base, sec["times"]]))
    spec = GirsanovSpec(sec["x"], sec["variant"])
    records = []
    for t in sorted(set(sec["times"])):
        sub = TimeGrid(points[points <= t])
        est = q_expectation(_FUNCTIONALS[sec["functional"]], run["n_paths"], spec, sub, run["seed"], vectorized=True)
        records.append(dict(est.as_record(), functional=sec["functional"]))
    if fmt == "csv":
        keys = ["variant", "functional", "x", "t", "estimate", "std_error", "n_paths", "seed"]
        return {"main": to_csv(keys, [[r[k] for k in keys] for r in records])}
    return {"main": to_json({"records": records})}


def run_local_time(cfg: dict, fmt: str) -> dict[str, str]:
    run, sec = cfg["run"], cfg["local_time"]
    grid = TimeGrid.uniform(run["n_steps"], sec["horizon"])
    sweep = local_time_sweep(
        grid,
        run["n_paths"],
        run["seed"],
        sec["levels"],
        times=sec["times"],
        epsilon=sec["epsilon"],
        tols=sec["tols"],
        process=sec["process"],
    )
    fields = ["level", "time", "tanaka", "tanaka_se", "occupation", "occupation_se"]
    if fmt == "csv":
        return {"main": to_csv(fields, [[getattr(r, f) for f in fields] for r in sweep.rows])}
    return {
        "main": to_json(
            {
                "process": sweep.process,
                "n_paths": sweep.n_paths,
                "n_steps": sweep.n_steps,
                "epsilon": sweep.epsilon,
                "seed": run["seed"],
                "rows": [{f: getattr(r, f) for f in fields} for r in sweep.rows],
                "bands": [
                    {"level": b.level, "tolerance": b.tolerance, "measure": b.measure, "measure_se": b.measure_se}
                    for b in sweep.bands
                ],
            }
        )
    }


def run_crash(cfg: dict, fmt: str) -> dict[str, str]:
    run, sec = cfg["run"], cfg["crash"]
    spec = CrashSpec(GbmParams(sec["mu"], sec["sigma"], sec["s0"]), sec["s_crash"], sec["payout"], sec["horizon"])
    doc = crash_report(spec, sec["t"], run["n_steps"], run["n_paths"], run["seed"])
    return {"main": record_csv(doc) if fmt == "csv" else to_json(doc)}


def _mc(est) -> dict:
    return {"estimate": est.estimate, "se": est.std_error}


def run_price_barrier(cfg: dict, fmt: str) -> dict[str, str]:
    run, sec = cfg["run"], cfg["barrier"]
    spec = barrier_mod.BarrierOptionSpec(
        GbmParams(sec["rate"], sec["sigma"], sec["s0"]),
        sec["strike"],
        sec["barrier"],
        sec["rate"],
        sec["maturity"],
        sec["dividend_yield"],
        sec["side"],
    )
    doc: dict[str, Any] = {
        "inputs": {k: sec[k] for k in ("s0", "strike", "barrier", "rate", "dividend_yield", "sigma", "maturity")},
        "variant": spec.side,
        "price": barrier_mod.price(spec),
        "prices": {
            "down_in_put": barrier_mod.down_and_in_put_price(spec),
            "down_out_put": barrier_mod.down_and_out_put_price(spec),
            "vanilla_put": barrier_mod.vanilla_put_price(spec),
        },
        "greeks": barrier_mod.greeks(spec),
        "mc_cross_check": None,
        "se": None,
    }
    if sec["mc"]:
        mc = barrier_mod.mc_down_and_in_put(spec, run["n_paths"], run["n_steps"], run["seed"], antithetic=run["antithetic"])
        chosen = {"down_in_put": mc.european, "down_out_put": mc.down_out, "vanilla_put": mc.vanilla}[spec.side]
        doc["mc_cross_check"] = {
            "estimate": chosen.estimate,
            "down_in_put": _mc(mc.european),
            "down_out_put": _mc(mc.down_out),
            "vanilla_put": _mc(mc.vanilla),
            "american_at_hit": _mc(mc.american_at_hit),
            "knock_in_rate": mc.knock_in_rate,
            "monitoring_bias_estimate": mc.monitoring_bias_estimate,
            "n_paths": run["n_paths"],
            "n_steps": mc.n_steps,
            "seed": run["seed"],
        }
        doc["se"] = chosen.std_error
    return {"main": record_csv(doc) if fmt == "csv" else to_json(doc)}


def run_price_swaption(cfg: dict, fmt: str) -> dict[str, str]:
    run, sec = cfg["run"], cfg["swaption"]
    inputs = swaption_mod.SwaptionInputs(sec["forward"], sec["strike_rate"], sec["sigma"], sec["expiry"], sec["discount"])
    prices = swaption_mod.swaption_prices(inputs, sec["variant"])
    d1, d2 = swaption_mod.d1_d2(inputs)
    doc: dict[str, Any] = {
        "inputs": {k: sec[k] for k in ("forward", "strike_rate", "sigma", "expiry", "discount")},
        "variant": sec["variant"],
        "prices": {"put": prices.put, "call": prices.call},
        "put_sign": "negative" if prices.put < 0 else "non_negative",
        "d1": d1,
        "d2": d2,
        "greeks": swaption_mod.greeks(inputs, sec["variant"]),
        "mc_cross_check": None,
        "se": None,
    }
    if sec["mc"]:
        mc = swaption_mod.mc_swaption(inputs, run["n_paths"], run["seed"])
        # the Monte Carlo payoffs are Black's; the literal put is not a payoff price
        doc["mc_cross_check"] = {"put": _mc(mc.put), "call": _mc(mc.call), "payoff_model": "standard_black"}
        doc["se"] = {"put": mc.put.std_error, "call": mc.call.std_error}
    return {"main": record_csv(doc) if fmt == "csv" else to_json(doc)}


def run_scenario(cfg: dict, fmt: str) -> dict[str, str]:
    sec = cfg["scenario"]
    r, c = sec["r"], sec["c"]
    event_return = (sec["factor"] - sec["payout"]) / sec["factor"]
    rows = [
        {
            "beta1": b,
            "r_plus_beta1_c": r + b * c,
            "classification": scenario_classify(r, c, b),
            "signs": scenario_signs(c, b),
        }
        for b in sec["beta1"]
    ]
    if fmt == "csv":
        keys = ["beta1", "r_plus_beta1_c", "classification", "signs"]
        return {"main": to_csv(keys, [[row[k] for k in keys] for row in rows])}
    doc = {
        "inputs": sec,
        "alpha_zero_beta": alpha_zero_beta(r, c),
        "event_swap_return": {"no_event": c + r, "event": event_return},
        "rows": rows,
    }
    return {"main": to_json(doc)}


def run_kfactor(cfg: dict, fmt: str) -> dict[str, str]:
    run, sec = cfg["run"], cfg["kfactor"]
    model = model_from_lists(sec["betas"], sec["factor_mu"], sec["factor_sigma"], sec["delta"], sec["rate"])
    grid = TimeGrid.uniform(run["n_steps"], run["n_steps"] * sec["dt"])
    res = run_alpha_trials(model, sec["alpha"], grid, sec["n_trials"], run["seed"], sec["level"])
    n = len(res.alpha_hat)
    summary = {
        "alpha": sec["alpha"],
        "n_trials": n,
        "n_steps": run["n_steps"],
        "level": sec["level"],
        "critical_value": res.critical_value,
        "rejection_rate": res.rejection_rate,
        "detection_rate": res.detection_rate,
        "mean_alpha_hat": float(np.mean(res.alpha_hat)),
        "alpha_hat_se": float(np.std(res.alpha_hat, ddof=1) / math.sqrt(n)) if n > 1 else None,
        "mean_betas_hat": res.betas_hat.mean(axis=0),
        "seed": run["seed"],
    }
    if fmt == "csv":
        rows = [[i, a, t] for i, (a, t) in enumerate(zip(res.alpha_hat, res.t_stat))]
        return {"main": to_csv(["trial", "alpha_hat", "t_stat"], rows), ".summary.json": to_json(summary)}
    trials = [{"trial": i, "alpha_hat": a, "t_stat": t} for i, (a, t) in enumerate(zip(res.alpha_hat, res.t_stat))]
    return {"main": to_json({"summary": summary, "trials": trials})}


HANDLERS: dict[str, Callable[[dict, str], dict[str, str]]] = {
    "simulate-bridge": run_simulate_bridge,
    "girsanov": run_girsanov,
    "local-time": run_local_time,
    "crash": run_crash,
    "price-barrier": run_price_barrier,
    "price-swaption": run_price_swaption,
    "scenario": run_scenario,
    "kfactor-sim": run_kfactor,
}


# --------------------------------------------------------------------------
# run / manifest


def config_hash(cfg: dict) -> str:
    canon = json.dumps(_plain(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _check_writable(out: Path) -> None:
    parent = out.parent if str(out.parent) else Path(".")
    if out.is_dir():
        raise OutputError(f"{out} is a directory")
    if not parent.is_dir():
        raise OutputError(f"directory {parent} does not exist")
    if not os.access(parent, os.W_OK) or (out.exists() and not os.access(out, os.W_OK)):
        raise OutputError(f"{out} is not writable")


def build_config(subcommand: str, raw: dict, seed: int | None, fmt: str | None) -> dict:
    raw = {k: (dict(v) if isinstance(v, dict) else v) for k, v in raw.items()}
    run = raw.setdefault("run", {})
    if not isinstance(run, dict):
        raise config.ConfigError(["[run] must be a table"])
    if seed is not None:
        run["seed"] = seed
    if fmt is not None:
        run["format"] = fmt
    return config.resolve(raw, subcommand)


def run(cfg: dict, out: Path | None = None) -> dict:
    """Execute a resolved config; write outputs and return the manifest."""
    fmt = cfg["run"]["format"]
    if out is not None:
        _check_writable(out)
    t0 = time.perf_counter()
    docs = HANDLERS[cfg["subcommand"]](cfg, fmt)
    wall = time.perf_counter() - t0
    if out is None:
        sys.stdout.write("".join(docs.values()))
        return {}
    written: dict[str, str] = {}
    try:
        for suffix, text in docs.items():
            target = out if suffix == "main" else out.with_name(out.name + suffix)
            data = text.encode("utf-8")
            target.write_bytes(data)
            written[target.name] = hashlib.sha256(data).hexdigest()
        manifest = {
            "subcommand": cfg["subcommand"],
            "config": cfg,
            "config_hash": config_hash(cfg),
            "seed": cfg["run"]["seed"],
            "generator": GENERATOR_ID,
            "version": __version__,
            "wall_clock_seconds": wall,
            "outputs": written,
        }
        out.with_name(out.name + ".manifest.json").write_text(to_json(manifest), encoding="utf-8")
    except OSError as exc:
        raise OutputError(str(exc)) from exc
    return manifest


# --------------------------------------------------------------------------
# argument parsing


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2**64)")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="alphabridge", description="Seeded alpha-bridge experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True)
    for name in config.SUBCOMMANDS:
        s = sub.add_parser(name, help=f"run the {name} experiment")
        s.add_argument("--config", type=Path, help="TOML config file")
        s.add_argument("--seed", type=_u64, help="master seed (overrides run.seed)")
        s.add_argument("--out", type=Path, help="output file (default: stdout, no manifest)")
        s.add_argument("--format", choices=("csv", "json"), help="output format (overrides run.format)")
    v = sub.add_parser("validate", help="check a config and list every violation")
    v.add_argument("--config", type=Path, required=True)
    v.add_argument("--subcommand", dest="target", choices=config.SUBCOMMANDS, help="schema to check against")
    return p


def _err(msg: str) -> None:
    print(f"alphabridge: {msg}", file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = config.load(args.config) if args.config is not None else {}
    except config.ConfigError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    except OSError as exc:
        _err(f"cannot read config: {exc}")
        return EXIT_CONFIG

    if args.subcommand == "validate":
        violations = config.validate(raw, args.target)
        for line in violations:
            print(line)
        return EXIT_CONFIG if violations else EXIT_OK

    try:
        cfg = build_config(args.subcommand, raw, args.seed, args.format)
    except config.ConfigError as exc:
        for line in exc.violations:
            _err(line)
        return EXIT_CONFIG
    try:
        run(cfg, args.out)
    except OutputError as exc:
        _err(f"cannot write output: {exc}")
        return EXIT_OUTPUT
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
