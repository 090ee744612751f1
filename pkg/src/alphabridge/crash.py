"""Market-crash stopping time for a geometric Brownian motion.

The crash is the first time the price falls to ``S_E``.  Two different
probabilities are exposed on purpose:

``marginal_crash_prob``
    ``P{S(t) < S_E} = Φ(B_E / √t)`` with the Brownian threshold ``B_E``.
    This is what the crash-certainty argument computes and calls the
    distribution of the stopping time; it is the law of the price at a fixed
    time, not of the hitting time.

``first_passage_prob``
    ``P{τ <= t}`` from the reflection principle.  Always at least the
    marginal probability, and the right quantity wherever the hitting time
    itself matters.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr

from .paths import GbmParams, TimeGrid, gbm_paths
from .rng import chunk_size_for, chunks
from .stats import MCEstimate, RunningMoments

# Broadie-Glasserman-Kou constant -zeta(1/2)/sqrt(2 pi)
_CANCEL_ULPS = 4
BGK_BETA = 0.5825971579390106


@dataclass(frozen=True)
class CrashSpec:
    gbm: GbmParams
    s_crash: float
    payout: float = 0.0
    horizon: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 < self.s_crash < self.gbm.s0):
            raise ValueError("crash level must satisfy 0 < S_E < s0 (a down-crossing)")
        if self.payout < 0:
            raise ValueError("payout I must be >= 0")
        if not self.horizon > 0:
            raise ValueError("horizon must be > 0")


@dataclass(frozen=True)
class StoppingTimeSample:
    tau: float | None
    path_index: int
    hit_value: float | None

    @property
    def hit(self) -> bool:
        return self.tau is not None


def _check_t(t: float) -> float:
    t = float(t)
    if not t > 0:
        raise ValueError("t must be > 0")
    return t


def crash_threshold(spec: CrashSpec, t: float) -> float:
    """``B_E = [ln(S_E/s0) - (mu - sigma^2/2) t] / sigma``.

    A difference below the rounding noise of its two terms is returned as
    exactly 0, so a crash level placed on the drift path gives ``Φ = 1/2``.
    """
    t = _check_t(t)
    g = spec.gbm
    a = math.log(spec.s_crash / g.s0)
    b = g.log_drift * t
    # ln(S_E/s0) carries an absolute rounding error of order eps
    if abs(a - b) <= _CANCEL_ULPS * sys.float_info.epsilon * (1.0 + max(abs(a), abs(b))):
        return 0.0
    return (a - b) / g.sigma


def marginal_crash_prob(spec: CrashSpec, t: float) -> float:
    """``Φ_B(B_E)``, the N(0, t) distribution function at the threshold."""
    t = _check_t(t)
    return float(ndtr(crash_threshold(spec, t) / math.sqrt(t)))


def first_passage_prob(spec: CrashSpec, t: float) -> float:
    """``P{min_{s<=t} S(s) <= S_E}`` for continuous monitoring."""
    t = _check_t(t)
    g = spec.gbm
    nu, sig = g.log_drift, g.sigma
    b = math.log(spec.s_crash / g.s0)
    root = sig * math.sqrt(t)
    first = ndtr((b - nu * t) / root)
    second = math.exp(2.0 * nu * b / (sig * sig) + log_ndtr((b + nu * t) / root))
    return float(min(1.0, first + second))


def monitoring_bias_estimate(spec: CrashSpec, t: float, n_steps: int) -> float:
    """Expected shortfall of discrete monitoring at ``n_steps`` equal steps.

    Uses the continuity-correction shift of the barrier by
    ``exp(-BGK_BETA sigma sqrt(dt))``.  The value is negative (discrete
    monitoring misses crossings) and is only reported, never applied.
    """
    t = _check_t(t)
    if n_steps <= 0:
        raise ValueError("n_steps must be positive")
    shift = math.exp(-BGK_BETA * spec.gbm.sigma * math.sqrt(t / n_steps))
    shifted = CrashSpec(spec.gbm, spec.s_crash * shift, spec.payout, spec.horizon)
    return first_passage_prob(shifted, t) - first_passage_prob(spec, t)


def first_hit_index(values: np.ndarray, level: float) -> np.ndarray:
    """First column with ``values <= level`` per row, ``-1`` if none."""
    v = np.atleast_2d(values)
    below = v <= level
    idx = np.argmax(below, axis=1)
    return np.where(below.any(axis=1), idx, -1)


def stopping_times(
    spec: CrashSpec, grid: TimeGrid, n_paths: int, seed: int, *, start: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Discretely monitored crash times and prices at the hit (NaN when no hit)."""
    if grid.horizon > spec.horizon * (1 + 1e-12):
        raise ValueError("grid runs past the contract horizon")
    taus = np.full(n_paths, np.nan)
    hits = np.full(n_paths, np.nan)
    for s, m in chunks(n_paths, chunk_size_for(len(grid))):
        S = gbm_paths(spec.gbm, grid, m, seed, start=start + s)
        idx = first_hit_index(S, spec.s_crash)
        ok = idx >= 0
        rows = np.nonzero(ok)[0]
        taus[s + rows] = grid.points[idx[ok]]
        hits[s + rows] = S[rows, idx[ok]]
    return taus, hits


def sample_stopping_time(
    spec: CrashSpec, grid: TimeGrid, seed: int, path_index: int = 0
) -> StoppingTimeSample:
    taus, hits = stopping_times(spec, grid, 1, seed, start=path_index)
    if np.isnan(taus[0]):
        return StoppingTimeSample(None, path_index, None)
    return StoppingTimeSample(float(taus[0]), path_index, float(hits[0]))


def mc_marginal_frequency(spec: CrashSpec, t: float, n_paths: int, seed: int) -> MCEstimate:
    """Frequency of ``S(t) < S_E`` from exact terminal draws."""
    t = _check_t(t)
    grid = TimeGrid.uniform(1, t)
    acc = RunningMoments()
    for s, m in chunks(n_paths, 100_000):
        S = gbm_paths(spec.gbm, grid, m, seed, start=s)
        acc.update(S[:, -1] < spec.s_crash)
    return acc.result()


def mc_first_passage(
    spec: CrashSpec, t: float, n_steps: int, n_paths: int, seed: int
) -> MCEstimate:
    """Frequency of a discretely monitored crash by time ``t``."""
    t = _check_t(t)
    grid = TimeGrid.uniform(n_steps, t)
    acc = RunningMoments()
    for s, m in chunks(n_paths, chunk_size_for(len(grid))):
        logS = np.log(gbm_paths(spec.gbm, grid, m, seed, start=s))
        acc.update(logS.min(axis=1) <= math.log(spec.s_crash))
    return acc.result()


def crash_report(spec: CrashSpec, t: float, n_steps: int, n_paths: int, seed: int) -> dict:
    """Closed forms and Monte Carlo estimates in one record."""
    fp = mc_first_passage(spec, t, n_steps, n_paths, seed)
    marg = mc_marginal_frequency(spec, t, n_paths, seed)
    return {
        "spec": {
            "s0": spec.gbm.s0,
            "mu": spec.gbm.mu,
            "sigma": spec.gbm.sigma,
            "s_crash": spec.s_crash,
            "payout": spec.payout,
            "horizon": spec.horizon,
        },
        "t": t,
        "threshold": crash_threshold(spec, t),
        "marginal": marginal_crash_prob(spec, t),
        "first_passage": first_passage_prob(spec, t),
        "mc_estimate": fp.estimate,
        "se": fp.std_error,
        "mc_marginal": marg.estimate,
        "mc_marginal_se": marg.std_error,
        "monitoring_bias_estimate": monitoring_bias_estimate(spec, t, n_steps),
        "n_paths": n_paths,
        "n_steps": n_steps,
        "seed": seed,
    }
