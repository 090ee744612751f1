"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import math

import numpy as np
import pytest

from alphabridge import cli
from alphabridge.crash import (
    CrashSpec,
    first_passage_prob,
    marginal_crash_prob,
    mc_first_passage,
    mc_marginal_frequency,
    monitoring_bias_estimate,
    stopping_times,
)
from alphabridge.derivatives.barrier import (
    BarrierOptionSpec,
    down_and_in_put_price,
    down_and_out_put_price,
    mc_down_and_in_put,
    vanilla_put_price,
)
from alphabridge.derivatives.swaption import SwaptionInputs, d1_d2, swaption_prices
from alphabridge.derivatives.systemic import (
    matched_price_path,
    restricted_scenario,
    systemic_alpha_increments,
)
from alphabridge.localtime import local_time_sweep
from alphabridge.measure import GirsanovSpec, density_values, energy_integral
from alphabridge.multifactor import model_from_lists, run_alpha_trials
from alphabridge.paths import (
    GbmParams,
    TimeGrid,
    bridge_paper_sde_from_increments,
    bridge_pinned_paths,
    brownian_increments,
    brownian_paths,
    doob_bridge_paths,
    running_sum,
)

from conftest import mean_se

SEED = 12345

pytestmark = pytest.mark.slow


@pytest.fixture
def report(capsys):
    def emit(number: int, name: str, checks: dict[str, bool], detail: str = "") -> None:
        ok = all(checks.values())
        failed = [k for k, v in checks.items() if not v]
        line = f"ACCEPTANCE {number:2d} {name}: {'PASS' if ok else 'FAIL'}"
        if detail:
            line += f"  [{detail}]"
        if failed:
            line += f"  failed: {', '.join(failed)}"
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return emit


def test_01_bridge_covariance(report):
    grid = TimeGrid([0.0, 0.25, 0.5, 0.75])
    _, G = doob_bridge_paths(grid, 100_000, SEED)
    checks, worst = {}, 0.0
    for i in range(1, 4):
        for j in range(i, 4):
            s1, s2 = grid.points[i], grid.points[j]
            m, se = mean_se(G[:, i] * G[:, j])
            z = abs(m - s1 * (1 - s2)) / se
            worst = max(worst, z)
            checks[f"cov({s1},{s2})"] = z <= 3.0
    report(1, "bridge covariance", checks, f"max |z| = {worst:.2f}")


def test_02_bridge_pinning(report):
    grid = TimeGrid.bridge(10_000, 1e-4)
    v = bridge_pinned_paths(0.0, 0.0, grid, 1000, SEED)[:, -1]
    dev = float(np.mean(np.abs(v)))
    report(2, "bridge pinning", {"mean |X(1-1e-4)| < 0.05": dev < 0.05}, f"mean deviation = {dev:.5f}")


def test_03_girsanov_martingale(report):
    x = 0.3
    grid = TimeGrid.uniform(750, 0.75)
    bm = brownian_paths(grid, 100_000, SEED)
    std = density_values(grid, bm, GirsanovSpec(x, "standard"))
    lit = density_values(grid, bm, GirsanovSpec(x, "paper_literal"))
    energy = energy_integral(grid, x)
    checks, zs = {}, []
    for t in (0.25, 0.5, 0.75):
        i = grid.index_of(t)
        m, se = mean_se(std[:, i])
        zs.append(abs(m - 1.0) / se)
        checks[f"standard E[M({t})] = 1"] = zs[-1] <= 3.0
        m, se = mean_se(lit[:, i])
        zs.append(abs(m - math.exp(-0.5 * energy[i])) / se)
        checks[f"literal E[M({t})]"] = zs[-1] <= 3.0
    report(3, "Girsanov martingale", checks, f"max |z| = {max(zs):.2f}")


def test_04_local_time(report):
    grid = TimeGrid.uniform(100_000)
    tols = (2e-2, 1e-2, 5e-3)
    sweep = local_time_sweep(grid, 10_000, SEED, [0.0, 0.25], epsilon=1e-2, tols=tols)
    rows = {r.level: r for r in sweep.rows}
    target = math.sqrt(2 / math.pi)
    two_l = 2 * rows[0.0].tanaka
    checks = {"E[2L(1,0)] within 1%": abs(two_l - target) / target < 0.01}
    for x, r in rows.items():
        checks[f"Tanaka vs occupation x={x}"] = abs(r.tanaka - r.occupation) / r.tanaka < 0.05
    measures = [b.measure for b in sweep.bands if b.level == 0.0]
    checks["measure monotone in tol"] = bool(np.all(np.diff(measures) < 0))
    ratios = {}
    for b in sweep.bands:
        if b.level == 0.0 and b.tolerance in (1e-2, 5e-3):
            # band occupation ~ 2 tol times the semimartingale local time 2L
            ratios[b.tolerance] = b.measure / (2 * b.tolerance * two_l)
            checks[f"measure/(2 tol 2L) tol={b.tolerance}"] = abs(ratios[b.tolerance] - 1) < 0.10
    detail = f"E[2L] = {two_l:.5f} (se {2 * rows[0.0].tanaka_se:.5f}), ratios = " + ", ".join(
        f"{k:g}:{v:.4f}" for k, v in ratios.items()
    )
    report(4, "local time", checks, detail)


def test_05_crash_model(report):
    spec = CrashSpec(GbmParams(0.05, 0.2, 100.0), 80.0)
    p = marginal_crash_prob(spec, 1.0)
    marg = mc_marginal_frequency(spec, 1.0, 100_000, SEED)
    fp = first_passage_prob(spec, 1.0)
    hit = mc_first_passage(spec, 1.0, 10_000, 100_000, SEED)
    bias = abs(monitoring_bias_estimate(spec, 1.0, 10_000))
    certain = CrashSpec(GbmParams(0.02, 0.3, 100.0), 80.0, 0.0, 1000.0)
    taus, _ = stopping_times(certain, TimeGrid.uniform(10_000, 1000.0), 10_000, SEED)
    frac = float(np.mean(~np.isnan(taus)))
    zero = CrashSpec(GbmParams(0.01, 0.2, 100.0), 100 * math.exp(-0.01 * 2.0), 0.0, 2.0)
    checks = {
        "marginal within 3 SE": abs(marg.estimate - p) <= 3 * marg.std_error,
        "first passage within 3 SE + bias": abs(hit.estimate - fp) <= 3 * hit.std_error + bias,
        "hit fraction > 0.999": frac > 0.999,
        "B_E = 0 gives 0.5": marginal_crash_prob(zero, 2.0) == 0.5,
    }
    detail = f"marginal {p:.5f} vs {marg.estimate:.5f}; passage {fp:.5f} vs {hit.estimate:.5f}; fraction {frac:.4f}"
    report(5, "crash model", checks, detail)


def random_barrier_specs(n, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        s0 = rng.uniform(50, 150)
        H = s0 * rng.uniform(0.3, 0.98)
        K = H * rng.uniform(1.01, 2.0)
        r, q, sig, T = rng.uniform(-0.02, 0.1), rng.uniform(0, 0.06), rng.uniform(0.05, 0.6), rng.uniform(0.05, 5)
        out.append(BarrierOptionSpec(GbmParams(r, sig, s0), K, H, r, T, q))
    return out


def test_06_barrier_options(report):
    parity = max(
        abs(down_and_in_put_price(s) + down_and_out_put_price(s) - vanilla_put_price(s))
        for s in random_barrier_specs(100, SEED)
    )
    spec = BarrierOptionSpec(GbmParams(0.05, 0.2, 100.0), 100.0, 80.0, 0.05, 1.0)
    cf = down_and_in_put_price(spec)
    mc = mc_down_and_in_put(spec, 1_000_000, 1000, SEED)
    low = BarrierOptionSpec(GbmParams(0.05, 0.2, 100.0), 100.0, 1e-6, 0.05, 1.0)
    near = BarrierOptionSpec(GbmParams(0.05, 0.2, 100.0), 110.0, 100.0 * (1 - 1e-12), 0.05, 1.0)
    checks = {
        "in-out parity 1e-10": parity <= 1e-10,
        "MC within 3 SE + bias": abs(mc.european.estimate - cf)
        <= 3 * mc.european.std_error + abs(mc.monitoring_bias_estimate),
        "barrier -> 0 gives 0": down_and_in_put_price(low) <= 1e-8,
        "barrier -> spot gives vanilla": abs(down_and_in_put_price(near) - vanilla_put_price(near)) <= 1e-8,
    }
    detail = (
        f"parity {parity:.1e}; cf {cf:.5f} mc {mc.european.estimate:.5f} "
        f"se {mc.european.std_error:.5f} bias {mc.monitoring_bias_estimate:.5f}"
    )
    report(6, "barrier options", checks, detail)


def test_07_swaption(report):
    rng = np.random.default_rng(SEED)

    def draw():
        return SwaptionInputs(
            rng.uniform(0.001, 0.2), rng.uniform(0.001, 0.2), rng.uniform(0.01, 1.5), rng.uniform(0.05, 10), rng.uniform(0.3, 1.0)
        )

    parity = 0.0
    for _ in range(100):
        inp = draw()
        p = swaption_prices(inp)
        parity = max(parity, abs(p.call - p.put - inp.discount * (inp.forward - inp.strike_rate)))
    atm = swaption_prices(SwaptionInputs(0.05, 0.05, 0.2, 1.0, 0.95))
    mono = True
    for _ in range(20):
        inp = draw()
        base = swaption_prices(inp)
        up_f = swaption_prices(SwaptionInputs(inp.forward * 1.01, inp.strike_rate, inp.sigma, inp.expiry, inp.discount))
        up_s = swaption_prices(SwaptionInputs(inp.forward, inp.strike_rate, inp.sigma * 1.01, inp.expiry, inp.discount))
        mono &= up_f.call > base.call and up_f.put < base.put
        mono &= up_s.call > base.call and up_s.put > base.put
    lit_in = SwaptionInputs(0.05, 0.04, 0.2, 1.0, 0.9)
    lit = swaption_prices(lit_in, "paper_literal")
    checks = {
        "parity 1e-12": parity <= 1e-12,
        "ATM C = P": abs(atm.call - atm.put) <= 1e-15,
        "monotone in F and sigma": bool(mono),
        "literal d1": abs(d1_d2(lit_in)[0] - 1.2157177565710489) <= 1e-14,
        "literal call": abs(lit.call - 0.009533668280944698) <= 1e-15,
        "literal put": abs(lit.put - -0.0005336682809446917) <= 1e-15,
    }
    report(7, "swaption", checks, f"parity {parity:.1e}")


def test_08_stochastic_equivalence(report):
    grid = TimeGrid.bridge(2000)
    rng = np.random.default_rng(SEED)
    event = rng.random(len(grid)) < 0.01
    factor = rng.uniform(0.5, 2.0, len(grid))
    sc = restricted_scenario(0.4, 0.03, -0.02, grid, event, payout=0.3, factor=factor)
    S = matched_price_path(sc, 50.0)
    dB = brownian_increments(grid, 100, SEED)
    worst = 0.0
    for row in dB:
        B = running_sum(0.0, row[None])[0]
        resid = systemic_alpha_increments(sc, S, B, 1.0)
        bridge = np.diff(bridge_paper_sde_from_increments(0.4, grid, row)[0])
        worst = max(worst, float(np.max(np.abs(resid - bridge))))
    report(8, "stochastic equivalence", {"per-step error <= 1e-12": worst <= 1e-12}, f"max error {worst:.1e}")


def test_09_kfactor_alpha_test(report):
    model = model_from_lists([1.0], [0.08], [0.2], 0.05, 0.03)
    grid = TimeGrid.uniform(10_000, 10_000 / 252)
    size = run_alpha_trials(model, 0.0, grid, 1000, SEED).rejection_rate
    power = run_alpha_trials(model, 0.05, grid, 1000, SEED).detection_rate
    checks = {"size in [3%, 7%]": 0.03 <= size <= 0.07, "power > 95%": power > 0.95}
    report(9, "K-factor alpha test", checks, f"size {size:.3f}, power {power:.3f}")


SMALL = {
    "simulate-bridge": "[bridge]\nkind = \"paper_sde\"\nx = 0.2\n",
    "girsanov": "[girsanov]\nx = 0.3\ntimes = [0.25, 0.5]\nhorizon = 0.5\n",
    "local-time": "[local_time]\nlevels = [0.0, 0.25]\ntols = [0.01]\n",
    "crash": "[crash]\n",
    "price-barrier": "[barrier]\n",
    "price-swaption": "[swaption]\n",
    "scenario": "[scenario]\n",
    "kfactor-sim": "[kfactor]\nn_trials = 5\n",
}


def test_10_determinism(report, tmp_path):
    checks = {}
    for sub, body in SMALL.items():
        cfg = tmp_path / f"{sub}.toml"
        cfg.write_text(f"[run]\nn_paths = 200\nn_steps = 100\nseed = {SEED}\n" + body)
        for fmt in ("json", "csv"):
            blobs = []
            for k in range(2):
                out = tmp_path / f"{sub}.{k}.{fmt}"
                code = cli.main([sub, "--config", str(cfg), "--out", str(out), "--format", fmt])
                blobs.append(out.read_bytes() if code == 0 else None)
            checks[f"{sub} {fmt}"] = blobs[0] is not None and blobs[0] == blobs[1]
    report(10, "determinism", checks, f"{len(checks)} subcommand/format pairs")
