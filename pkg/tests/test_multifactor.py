import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from alphabridge.multifactor import (
    HedgeFactorMatrix,
    KFactorModel,
    RankDeficientError,
    cumulative_alpha,
    estimate_alpha_ols,
    gamma_increment,
    hedge_transform,
    model_from_lists,
    run_alpha_trials,
    simulate_kfactor_returns,
)
from alphabridge.paths import TimeGrid, bridge_paper_sde_from_increments, brownian_increments

from conftest import mean_se, within


def test_ones_column_gives_uniform_row():
    A = hedge_transform(np.ones((5, 1)))
    np.testing.assert_allclose(A, np.full((1, 5), 0.2), rtol=0, atol=1e-15)


def test_identity():
    np.testing.assert_allclose(hedge_transform(np.eye(4)), np.eye(4), atol=1e-15)


def test_random_matrix_left_inverse(seed):
    Z = np.random.default_rng(seed).normal(size=(20, 3))
    A = hedge_transform(Z)
    np.testing.assert_allclose(A @ Z, np.eye(3), atol=1e-10)
    # independent oracle: normal equations through a generic solver
    ref = np.linalg.solve(Z.T @ Z, Z.T)
    np.testing.assert_allclose(A, ref, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (8, 3), elements=st.floats(-5, 5)))
def test_left_inverse_property(Z):
    try:
        hfm = HedgeFactorMatrix(Z)
    except RankDeficientError:
        return
    if hfm.condition_number > 1e6:
        return
    np.testing.assert_allclose(hedge_transform(hfm) @ Z, np.eye(3), atol=1e-10 * hfm.condition_number)


def test_rank_deficient_reports_condition():
    Z = np.ones((6, 2))
    with pytest.raises(RankDeficientError) as exc:
        hedge_transform(Z)
    assert exc.value.condition_number > 1e12
    with pytest.raises(RankDeficientError):
        HedgeFactorMatrix(np.ones((2, 3)))


def test_gamma_increment_reduces_to_scalar_bridge(seed):
    grid = TimeGrid.bridge(500)
    dB = brownian_increments(grid, 1, seed)[0]
    scalar = np.diff(bridge_paper_sde_from_increments(0.5, grid, dB)[0])
    t, h = grid.points[:-1], grid.dt
    for Z in (np.ones((1, 1)), np.ones((4, 1))):
        inc = np.array([gamma_increment(Z, 0.5, t[i], h[i], dB[i])[0] for i in range(grid.n_steps)])
        np.testing.assert_allclose(inc, scalar, rtol=0, atol=1e-12)


def test_gamma_increment_edge_cases():
    np.testing.assert_array_equal(gamma_increment(np.eye(3), 0.0, 0.3, 0.01, 0.0), np.zeros(3))
    a = gamma_increment(np.ones((3, 1)), 0.4, 0.2, 0.01, 0.05)
    b = gamma_increment(2 * np.ones((3, 1)), 0.4, 0.2, 0.01, 0.05)
    np.testing.assert_allclose(b, a / 2, rtol=1e-14)
    with pytest.raises(ValueError):
        gamma_increment(np.ones((3, 1)), 0.4, 1.0, 0.01, 0.0)


def test_cumulative_alpha(seed):
    rng = np.random.default_rng(seed)
    Z = rng.normal(size=(6, 2))
    assert np.all(cumulative_alpha(Z, np.zeros((10, 2))) == 0)
    gamma = rng.normal(size=(10, 1))
    np.testing.assert_array_equal(cumulative_alpha(np.ones((3, 1)), gamma), np.repeat(gamma, 3, axis=1))
    g2 = rng.normal(size=(10, 2))
    A = cumulative_alpha(Z, g2)
    np.testing.assert_allclose(A @ hedge_transform(Z).T, g2, atol=1e-10)
    with pytest.raises(ValueError):
        cumulative_alpha(Z, np.zeros((10, 3)))


def test_zero_factor_model_is_flat():
    model = KFactorModel((), (), 0.0, 0.03)
    s = simulate_kfactor_returns(model, 0.0, TimeGrid.uniform(100), 1)
    assert np.all(s.excess == 0.0)


def test_exact_factor_relation():
    model = model_from_lists([1.3], [0.08], [0.2], 0.0, 0.03)
    s = simulate_kfactor_returns(model, 0.0, TimeGrid.uniform(500, 2.0), 3)
    res = estimate_alpha_ols(s.excess, s.factor_excess, s.dt)
    assert res.r_squared == pytest.approx(1.0, abs=1e-10)
    assert abs(res.alpha_hat) <= 1e-12
    assert res.betas_hat[0] == pytest.approx(1.3, rel=1e-12)


def test_intercept_recovery(seed):
    model = model_from_lists([1.0], [0.08], [0.2], 0.05, 0.03)
    grid = TimeGrid.uniform(10_000, 10_000 / 252)
    s = simulate_kfactor_returns(model, 0.01, grid, seed)
    res = estimate_alpha_ols(s.excess, s.factor_excess, s.dt)
    assert within(res.alpha_hat, res.alpha_se, 0.01)


def test_round_trip_unbiased(seed):
    model = model_from_lists([0.8, -0.5], [0.06, 0.1], [0.15, 0.3], 0.1, 0.02)
    grid = TimeGrid.uniform(1000, 1000 / 252)
    res = run_alpha_trials(model, 0.04, grid, 1000, seed)
    m, se = mean_se(res.alpha_hat)
    assert within(m, se, 0.04)
    for k, beta in enumerate(model.betas):
        m, se = mean_se(res.betas_hat[:, k])
        assert within(m, se, beta)


def test_collinear_factors_flagged():
    f = np.random.default_rng(0).normal(size=(100, 1))
    with pytest.raises(RankDeficientError):
        estimate_alpha_ols(np.zeros(100), np.hstack([f, 2 * f]))


def test_ols_needs_enough_rows():
    with pytest.raises(ValueError):
        estimate_alpha_ols(np.zeros(2), np.zeros((2, 1)))


def test_model_invariants():
    with pytest.raises(ValueError):
        model_from_lists([1.0], [0.1], [0.2], -0.1, 0.0)
    with pytest.raises(ValueError):
        model_from_lists([1.0, 2.0], [0.1], [0.2], 0.1, 0.0)
