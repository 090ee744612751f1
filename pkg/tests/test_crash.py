import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alphabridge.crash import (
    CrashSpec,
    crash_report,
    crash_threshold,
    first_hit_index,
    first_passage_prob,
    marginal_crash_prob,
    mc_first_passage,
    mc_marginal_frequency,
    monitoring_bias_estimate,
    sample_stopping_time,
    stopping_times,
)
from alphabridge.paths import GbmParams, TimeGrid, gbm_from_brownian

from conftest import within


def worked(mu=0.05, sigma=0.2, s0=100.0, s_crash=80.0, horizon=1.0):
    return CrashSpec(GbmParams(mu, sigma, s0), s_crash, 0.0, horizon)


def test_spec_invariants():
    with pytest.raises(ValueError):
        worked(s_crash=100.0)
    with pytest.raises(ValueError):
        worked(s_crash=120.0)
    with pytest.raises(ValueError):
        worked(sigma=0.0)
    with pytest.raises(ValueError):
        CrashSpec(GbmParams(0.0, 0.2, 100.0), 80.0, -1.0)


def test_threshold_worked_value():
    expected = (math.log(0.8) - 0.03) / 0.2
    assert crash_threshold(worked(), 1.0) == pytest.approx(expected, rel=1e-14)
    assert crash_threshold(worked(), 1.0) == pytest.approx(-1.2657, abs=1e-4)


def test_threshold_zero_on_drift_path():
    spec = worked(mu=0.01, sigma=0.2, s_crash=100 * math.exp(-0.01 * 2.0))
    assert crash_threshold(spec, 2.0) == pytest.approx(0.0, abs=1e-14)
    assert marginal_crash_prob(spec, 2.0) == 0.5


def test_threshold_halves_when_sigma_doubles():
    a = worked(mu=0.02, sigma=0.2)
    b = worked(mu=0.08, sigma=0.4)
    assert crash_threshold(b, 1.0) == pytest.approx(0.5 * crash_threshold(a, 1.0), rel=1e-14)


def test_threshold_monotonicity():
    t = 1.0
    assert crash_threshold(worked(s0=110.0), t) < crash_threshold(worked(s0=100.0), t)
    assert crash_threshold(worked(s_crash=85.0), t) > crash_threshold(worked(s_crash=80.0), t)


def test_time_must_be_positive():
    for f in (crash_threshold, marginal_crash_prob, first_passage_prob):
        with pytest.raises(ValueError):
            f(worked(), 0.0)


def test_marginal_worked_value_and_mc(seed):
    spec = worked()
    p = marginal_crash_prob(spec, 1.0)
    assert p == pytest.approx(0.1028, abs=1e-4)
    mc = mc_marginal_frequency(spec, 1.0, 100_000, seed)
    assert within(mc.estimate, mc.std_error, p)


def test_marginal_in_open_unit_interval():
    spec = worked()
    for t in (1e-3, 0.5, 10.0, 500.0):
        assert 0.0 < marginal_crash_prob(spec, t) < 1.0


def test_crash_certain_when_drift_below_half_variance():
    spec = worked(mu=0.01, sigma=0.3)
    assert marginal_crash_prob(spec, 1000.0) > 0.999
    assert first_passage_prob(spec, 1000.0) > 0.999


def test_first_passage_regimes_at_long_horizon():
    assert first_passage_prob(worked(mu=0.0, sigma=0.3), 1e3) > 0.999
    # positive log drift: the hitting probability tends to (S_E/s0)^(2 nu / sigma^2) < 1
    up = worked(mu=0.1, sigma=0.2)
    limit = 0.8 ** (2 * 0.08 / 0.04)
    assert first_passage_prob(up, 1e3) == pytest.approx(limit, rel=1e-6)


def test_first_passage_driftless_hits_everything():
    spec = worked(mu=0.02, sigma=0.2)  # nu = 0
    assert first_passage_prob(spec, 1e8) == pytest.approx(1.0, abs=1e-3)


def test_first_passage_monotone_in_time():
    spec = worked()
    ts = np.linspace(0.01, 50, 200)
    p = [first_passage_prob(spec, t) for t in ts]
    assert np.all(np.diff(p) >= 0)


@settings(max_examples=20, deadline=None)
@given(
    st.floats(-0.2, 0.2),
    st.floats(0.05, 0.8),
    st.floats(0.3, 0.99),
    st.floats(0.05, 20.0),
)
def test_first_passage_dominates_marginal(mu, sigma, ratio, t):
    spec = worked(mu=mu, sigma=sigma, s_crash=100.0 * ratio)
    assert first_passage_prob(spec, t) >= marginal_crash_prob(spec, t) - 1e-15


def test_first_passage_mc_within_bias(seed):
    spec = worked()
    fp = first_passage_prob(spec, 1.0)
    mc = mc_first_passage(spec, 1.0, 1000, 20_000, seed)
    bias = monitoring_bias_estimate(spec, 1.0, 1000)
    assert bias < 0
    assert abs(mc.estimate - fp) <= 3 * mc.std_error + abs(bias)


def test_mc_hit_frequency_grows_with_steps(seed):
    spec = worked()
    freqs = [mc_first_passage(spec, 1.0, n, 20_000, seed).estimate for n in (10, 100, 1000)]
    assert freqs[0] <= freqs[1] <= freqs[2]


def test_zero_noise_crossing_time():
    spec = worked(mu=0.01, sigma=0.3)
    nu = spec.gbm.log_drift
    grid = TimeGrid.uniform(10_000, 10.0 * math.log(0.8) / nu)
    S = gbm_from_brownian(spec.gbm, grid, np.zeros(len(grid)))
    tau = grid.points[first_hit_index(S, spec.s_crash)[0]]
    assert abs(tau - math.log(0.8) / nu) <= grid.dt[0]


def test_stopping_time_samples(seed):
    spec = worked(horizon=1.0)
    grid = TimeGrid.uniform(500)
    taus, hits = stopping_times(spec, grid, 200, seed)
    hit = ~np.isnan(taus)
    assert np.all(taus[hit] <= 1.0)
    assert np.all(hits[hit] <= spec.s_crash)
    single = sample_stopping_time(spec, grid, seed, 3)
    if single.hit:
        assert single.tau == taus[3]
    else:
        assert np.isnan(taus[3]) and single.hit_value is None
    with pytest.raises(ValueError):
        stopping_times(spec, TimeGrid.uniform(10, 2.0), 5, seed)


def test_crash_certainty_fraction(seed):
    spec = worked(mu=0.02, sigma=0.3, horizon=1000.0)
    taus, _ = stopping_times(spec, TimeGrid.uniform(10_000, 1000.0), 10_000, seed)
    assert np.mean(~np.isnan(taus)) > 0.999


def test_report_fields(seed):
    rep = crash_report(worked(), 1.0, 50, 500, seed)
    for key in ("spec", "t", "marginal", "first_passage", "mc_estimate", "se"):
        assert key in rep
    assert rep["first_passage"] >= rep["marginal"]
