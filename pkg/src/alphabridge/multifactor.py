"""Multi-factor trade-strategy alpha and the K-factor excess-return model.

The hedge transform ``A = (ZᵀZ)⁻¹Zᵀ`` turns one background Brownian motion
into per-factor strategy increments

    dγ_i = (Σ_k a_ik) [x/(1-t) dt - dB],

where the sum runs over the full row of ``A``.  With ``Z`` a column of ones
every row sums to one and the scalar alpha bridge comes back.

The K-factor model simulates

    dS/S - r dt = α dt + Σ_k β_k (dX_k/X_k - r dt) + δ dε

in discrete steps so that an econometrician's OLS intercept test can be run
on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy import stats

from .paths import GbmParams, TimeGrid
from .rng import substream

COND_LIMIT = 1e12


class RankDeficientError(ValueError):
    def __init__(self, message: str, condition_number: float):
        super().__init__(f"{message} (condition number {condition_number:.3g})")
        self.condition_number = condition_number


def _condition(m: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    with np.errstate(over="ignore", divide="ignore"):
        cond = float(s[0] / s[-1]) if s[-1] > 0 else float("inf")
    return u, s, vt, cond


@dataclass(frozen=True, eq=False)
class HedgeFactorMatrix:
    Z: np.ndarray
    condition_number: float = field(init=False)

    def __post_init__(self) -> None:
        z = np.array(self.Z, dtype=float)
        if z.ndim == 1:
            z = z[:, None]
        if z.ndim != 2 or z.size == 0:
            raise ValueError("Z must be a non-empty n x p matrix")
        n, p = z.shape
        if p > n:
            raise RankDeficientError(f"Z is {n} x {p}: more factors than rows", float("inf"))
        cond = _condition(z)[3]
        if not cond <= COND_LIMIT:
            raise RankDeficientError("Z is not of full column rank", cond)
        z.setflags(write=False)
        object.__setattr__(self, "Z", z)
        object.__setattr__(self, "condition_number", cond)

    @property
    def shape(self) -> tuple[int, int]:
        return self.Z.shape


def _as_hfm(Z) -> HedgeFactorMatrix:
    return Z if isinstance(Z, HedgeFactorMatrix) else HedgeFactorMatrix(Z)


def hedge_transform(Z) -> np.ndarray:
    """``(ZᵀZ)⁻¹Zᵀ`` (p x n) from the thin SVD of ``Z``."""
    z = _as_hfm(Z).Z
    u, s, vt, _ = _condition(z)
    return (vt.T / s) @ u.T


def gamma_increment(Z, x: float, t: float, dt: float, dB: float) -> np.ndarray:
    """Per-factor strategy increments over ``[t, t + dt]``."""
    if t >= 1:
        raise ValueError("t must be < 1 (drift singular at 1)")
    weights = hedge_transform(Z).sum(axis=1)
    return weights * (x / (1.0 - t) * dt - dB)


def cumulative_alpha(Z, gamma_path) -> np.ndarray:
    """``A(t) = Z γ(t)`` for every row of ``gamma_path`` (points x p)."""
    z = _as_hfm(Z).Z
    g = np.asarray(gamma_path, dtype=float)
    if g.ndim == 1:
        g = g[:, None]
    if g.shape[1] != z.shape[1]:
        raise ValueError(f"gamma has {g.shape[1]} factors, Z has {z.shape[1]} columns")
    return g @ z.T


# --------------------------------------------------------------------------
# K-factor excess returns


@dataclass(frozen=True)
class KFactorModel:
    betas: tuple[float, ...]
    factors: tuple[GbmParams, ...]
    delta: float
    rate: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        object.__setattr__(self, "factors", tuple(self.factors))
        if len(self.betas) != len(self.factors):
            raise ValueError("one beta per factor")
        if self.delta < 0:
            raise ValueError("idiosyncratic scale delta must be >= 0")

    @property
    def K(self) -> int:
        return len(self.betas)


class KFactorSample(NamedTuple):
    excess: np.ndarray
    factor_excess: np.ndarray
    dt: np.ndarray


def simulate_kfactor_returns(
    model: KFactorModel, alpha: float, grid: TimeGrid, seed: int, trial: int = 0
) -> KFactorSample:
    """Per-step excess returns of the security and of each factor.

    Factor prices are exact GBM steps; returns are simple returns per step.
    """
    dt = grid.dt
    n = dt.size
    z = substream(seed, trial).standard_normal((model.K + 1, n))
    fx = np.empty((n, model.K))
    for k, f in enumerate(model.factors):
        gross = np.exp(f.log_drift * dt + f.sigma * np.sqrt(dt) * z[k])
        fx[:, k] = gross - 1.0 - model.rate * dt
    excess = alpha * dt + fx @ np.asarray(model.betas) + model.delta * np.sqrt(dt) * z[model.K]
    return KFactorSample(excess, fx, dt)


class OLSResult(NamedTuple):
    alpha_hat: float
    t_stat: float
    betas_hat: np.ndarray
    alpha_se: float
    r_squared: float
    dof: int


def estimate_alpha_ols(returns, factor_returns, dt: float | np.ndarray = 1.0) -> OLSResult:
    """OLS of excess returns on an intercept and factor excess returns.

    ``alpha_hat`` is the intercept per unit time (intercept / dt, for a
    constant step).  The t statistic uses the homoskedastic standard error.
    """
    y = np.asarray(returns, dtype=float)
    f = np.asarray(factor_returns, dtype=float)
    if f.ndim == 1:
        f = f[:, None]
    n, K = f.shape
    if y.shape != (n,):
        raise ValueError("returns and factor returns must have the same length")
    if n < K + 2:
        raise ValueError(f"need at least {K + 2} observations")
    step = np.asarray(dt, dtype=float)
    if step.ndim and not np.allclose(step, step.flat[0]):
        raise ValueError("alpha per unit time needs a constant step")
    step = float(step.flat[0]) if step.ndim else float(step)
    X = np.column_stack([np.ones(n), f])
    cond = _condition(X)[3]
    if not cond <= COND_LIMIT:
        raise RankDeficientError("collinear regressors", cond)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    dof = n - K - 1
    s2 = float(resid @ resid) / dof
    xtx_inv = np.linalg.inv(X.T @ X)
    se0 = float(np.sqrt(s2 * xtx_inv[0, 0]))
    t = coef[0] / se0 if se0 > 0 else float("nan")
    tss = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float(resid @ resid) / tss if tss > 0 else float("nan")
    return OLSResult(float(coef[0] / step), float(t), coef[1:].copy(), se0 / step, r2, dof)


class TrialSummary(NamedTuple):
    alpha_hat: np.ndarray
    t_stat: np.ndarray
    betas_hat: np.ndarray
    critical_value: float

    @property
    def rejection_rate(self) -> float:
        """Two-sided rejection frequency of ``H0: alpha = 0``."""
        return float(np.mean(np.abs(self.t_stat) > self.critical_value))

    @property
    def detection_rate(self) -> float:
        """One-sided ``t > critical`` frequency (positive alpha detected)."""
        return float(np.mean(self.t_stat > self.critical_value))


def run_alpha_trials(
    model: KFactorModel,
    alpha: float,
    grid: TimeGrid,
    n_trials: int,
    seed: int,
    level: float = 0.05,
) -> TrialSummary:
    """Repeat simulate -> estimate; trial ``i`` uses substream ``i``."""
    ah = np.empty(n_trials)
    ts = np.empty(n_trials)
    bh = np.empty((n_trials, model.K))
    for i in range(n_trials):
        sample = simulate_kfactor_returns(model, alpha, grid, seed, trial=i)
        res = estimate_alpha_ols(sample.excess, sample.factor_excess, sample.dt)
        ah[i], ts[i], bh[i] = res.alpha_hat, res.t_stat, res.betas_hat
    dof = grid.n_steps - model.K - 1
    crit = float(stats.t.ppf(1 - level / 2, dof))
    return TrialSummary(ah, ts, bh, crit)


def model_from_lists(
    betas: Sequence[float], mus: Sequence[float], sigmas: Sequence[float], delta: float, rate: float
) -> KFactorModel:
    factors = tuple(GbmParams(m, s, 1.0) for m, s in zip(mus, sigmas))
    return KFactorModel(tuple(betas), factors, delta, rate)
