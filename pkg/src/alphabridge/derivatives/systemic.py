"""Event swap, market-systemic alpha residual, and the price jump on an event.

A perpetual event swap pays the spread ``c`` over the riskless rate until a
market-systemic event, and ``(X - I)/X`` when the event hits.  Adding the
event to a one-factor return model leaves the per-step residual

    α dt = dS/S - (r + β₁ c) dt - σ dB - χ_E β₁ (X₁ - I)/X₁

which, under the identifying restrictions (σ = 1, price moves only through
the event term, and ``x/(1-t) = -(r + β₁ c)``), is exactly the increment of
the constant-numerator alpha bridge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..paths import SamplePath, TimeGrid

SCENARIO_LABELS = ("alpha_zero", "scenario1", "scenario2", "neither")
ALPHA_ZERO_ATOL = 1e-12


def _on_grid(value, grid: TimeGrid, name: str, dtype=float) -> np.ndarray:
    a = np.asarray(value, dtype=dtype)
    if a.ndim == 0:
        a = np.full(len(grid), a, dtype=dtype)
    if a.shape != (len(grid),):
        raise ValueError(f"{name} must be a scalar or one value per grid point")
    return a


@dataclass(frozen=True, eq=False)
class MarketScenario:
    """Riskless rate, spread, trade-strategy factor and event path on a grid."""

    r: float
    c: float
    grid: TimeGrid
    beta1: np.ndarray
    event: np.ndarray
    payout: float = 0.0
    factor: np.ndarray = 1.0

    def __post_init__(self) -> None:
        if not self.r > 0:
            raise ValueError("riskless rate r must be > 0")
        if self.payout < 0:
            raise ValueError("payout I must be >= 0")
        object.__setattr__(self, "beta1", _on_grid(self.beta1, self.grid, "beta1"))
        object.__setattr__(self, "event", _on_grid(self.event, self.grid, "event", bool))
        object.__setattr__(self, "factor", _on_grid(self.factor, self.grid, "factor"))

    def jump_return(self) -> np.ndarray:
        """``(X₁ - I)/X₁`` per grid point."""
        if np.any(self.factor <= 0):
            raise ValueError("factor prices must be > 0")
        return (self.factor - self.payout) / self.factor

    def classify(self) -> list[str]:
        return [scenario_classify(self.r, self.c, b) for b in self.beta1]


def event_swap_return(scenario: MarketScenario, t_index: int) -> float:
    """Return on the event-swap factor at one grid point."""
    if not 0 <= t_index < len(scenario.grid):
        raise IndexError("t_index outside the grid")
    xk = float(scenario.factor[t_index])
    if xk <= 0:
        raise ValueError("factor price must be > 0")
    if scenario.event[t_index]:
        return (-scenario.payout + xk) / xk
    return scenario.c + scenario.r


def systemic_alpha_increments(
    scenario: MarketScenario, price_path, noise_path, sigma: float
) -> np.ndarray:
    """Per-step residual α_i Δt_i with coefficients taken at the left point."""
    grid = scenario.grid
    S = np.asarray(price_path, dtype=float)
    B = np.asarray(noise_path, dtype=float)
    if S.shape != (len(grid),) or B.shape != (len(grid),):
        raise ValueError("price and noise paths must be aligned with the scenario grid")
    if np.any(S <= 0):
        raise ValueError("prices must be > 0")
    jump = scenario.jump_return()[:-1]
    beta = scenario.beta1[:-1]
    chi = scenario.event[:-1].astype(float)
    dS_over_S = np.diff(S) / S[:-1]
    carry = (scenario.r + beta * scenario.c) * grid.dt
    return dS_over_S - carry - sigma * np.diff(B) - chi * beta * jump


def systemic_alpha_residual(
    scenario: MarketScenario, price_path, noise_path, sigma: float
) -> SamplePath:
    """Cumulative residual alpha; ``np.diff`` of the values gives the increments."""
    inc = systemic_alpha_increments(scenario, price_path, noise_path, sigma)
    values = np.concatenate(([0.0], np.cumsum(inc)))
    return SamplePath(scenario.grid, values, kind="systemic_alpha", meta={"sigma": sigma})


def alpha_zero_beta(r: float, c: float) -> float:
    """Factor loading that makes ``r + β₁ c = 0``."""
    if c == 0:
        raise ValueError("no finite loading cancels r when c = 0")
    return -r / c


def restricted_beta(x: float, r: float, c: float, grid: TimeGrid) -> np.ndarray:
    """β₁(t) solving ``x/(1-t) = -(r + β₁ c)`` on the grid."""
    grid.require_below_one()
    if c == 0:
        raise ValueError("c must be non-zero to solve for beta1")
    return -(x / (1.0 - grid.points) + r) / c


def restricted_scenario(
    x: float,
    r: float,
    c: float,
    grid: TimeGrid,
    event,
    payout: float = 0.0,
    factor=1.0,
) -> MarketScenario:
    return MarketScenario(r, c, grid, restricted_beta(x, r, c, grid), event, payout, factor)


def matched_price_path(scenario: MarketScenario, s0: float) -> np.ndarray:
    """Price that moves only through the event term: ``ΔS/S = χ_E β₁ (X₁-I)/X₁``."""
    if s0 <= 0:
        raise ValueError("s0 must be > 0")
    step = 1.0 + scenario.event[:-1] * scenario.beta1[:-1] * scenario.jump_return()[:-1]
    if np.any(step <= 0):
        raise ValueError("event jump would make the price non-positive")
    out = np.empty(len(scenario.grid))
    out[0] = s0
    out[1:] = s0 * np.cumprod(step)
    return out


def asset_jump_price(
    scenario: MarketScenario, t: float, delta: float, method: str = "trapezoid"
) -> float:
    """Price multiplier ``exp(∫_{t-Δ}^t χ_E β₁ (X₁ - I)/X₁ du)`` over the window."""
    if not delta > 0:
        raise ValueError("delta must be > 0")
    grid = scenario.grid
    hi = grid.index_of(t)
    lo = grid.index_of(t - delta)
    window = slice(lo, hi + 1)
    if np.any(scenario.factor[window] <= 0):
        raise ValueError("factor prices must be > 0 on the window")
    f = scenario.event[window] * scenario.beta1[window] * scenario.jump_return()[window]
    if not np.all(np.isfinite(f)):
        raise ValueError("integrand is not finite")
    h = np.diff(grid.points[window])
    if method == "trapezoid":
        integral = float(0.5 * (f[:-1] + f[1:]) @ h)
    elif method == "riemann":
        integral = float(f[:-1] @ h)
    else:
        raise ValueError(f"unknown quadrature {method!r}")
    return math.exp(integral)


def scenario_signs(c: float, beta1: float) -> str:
    """Sign pattern only: long X with negative spread, or short X with positive spread."""
    if beta1 > 0 and c < 0:
        return "scenario1"
    if beta1 < 0 and c > 0:
        return "scenario2"
    return "neither"


def scenario_classify(r: float, c: float, beta1_value: float) -> str:
    """``alpha_zero`` when ``r + β₁ c`` vanishes, else the sign scenario."""
    if not r > 0:
        raise ValueError("riskless rate r must be > 0")
    if abs(r + beta1_value * c) <= ALPHA_ZERO_ATOL:
        return "alpha_zero"
    return scenario_signs(c, beta1_value)
