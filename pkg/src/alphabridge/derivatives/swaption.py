"""Swaption on the floating leg ``-β₁ c`` against the fixed rate ``r_T``.

Two variants are priced:

``standard_black``
    Black's formulas: ``C = P·[F N(d1) - r_T N(d2)]`` and
    ``P = P·[r_T N(-d2) - F N(-d1)]``.

``paper_literal``
    The call as in Black, the put with the sign pattern
    ``P·[-r_T N(-d2) + F N(-d1)]``, which is the negative of Black's put.
    The negative value is returned as is and flagged in ``put_sign``.

In both variants ``d2 = d1 - σ√T``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import ndtr

from ..crash import CrashSpec, stopping_times
from ..paths import TimeGrid
from ..rng import chunks, standard_normals
from ..stats import MCEstimate, RunningMoments, mc_mean

VARIANTS = ("standard_black", "paper_literal")


class NonPositiveForward(ValueError):
    """``ln(F / r_T)`` is undefined: the scenario gives no positive floating forward."""


@dataclass(frozen=True)
class SwaptionInputs:
    forward: float
    strike_rate: float
    sigma: float
    expiry: float
    discount: float = 1.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.forward):
            raise ValueError("forward must be finite")
        if self.strike_rate <= 0:
            raise ValueError("strike rate r_T must be > 0")
        if self.sigma <= 0:
            raise ValueError("sigma must be > 0")
        if self.expiry <= 0:
            raise ValueError("expiry must be > 0")
        if not 0 < self.discount <= 1:
            raise ValueError("discount factor P(0, tau) must lie in (0, 1]")


class SwaptionPrices(NamedTuple):
    put: float
    call: float


def d1_d2(inputs: SwaptionInputs) -> tuple[float, float]:
    if inputs.forward <= 0:
        raise NonPositiveForward(
            f"forward {inputs.forward} <= 0; scenario conditions give no positive floating rate"
        )
    sd = inputs.sigma * math.sqrt(inputs.expiry)
    d1 = (math.log(inputs.forward / inputs.strike_rate) + 0.5 * sd * sd) / sd
    return d1, d1 - sd


def swaption_prices(inputs: SwaptionInputs, variant: str = "standard_black") -> SwaptionPrices:
    """``(P_swap, C_swap)``."""
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    d1, d2 = d1_d2(inputs)
    F, k, disc = inputs.forward, inputs.strike_rate, inputs.discount
    call = disc * (F * ndtr(d1) - k * ndtr(d2))
    if variant == "standard_black":
        put = disc * (k * ndtr(-d2) - F * ndtr(-d1))
    else:
        put = disc * (-k * ndtr(-d2) + F * ndtr(-d1))
    return SwaptionPrices(float(put), float(call))


def greeks(inputs: SwaptionInputs, variant: str = "standard_black", rel_bump: float = 1e-5) -> dict:
    """Central differences in the forward and the volatility."""
    out = {}
    for name, field in (("delta", "forward"), ("vega", "sigma")):
        base = getattr(inputs, field)
        h = abs(base) * rel_bump
        up = swaption_prices(replace(inputs, **{field: base + h}), variant)
        dn = swaption_prices(replace(inputs, **{field: base - h}), variant)
        out[f"call_{name}"] = (up.call - dn.call) / (2 * h)
        out[f"put_{name}"] = (up.put - dn.put) / (2 * h)
    return out


class SwaptionMC(NamedTuple):
    put: MCEstimate
    call: MCEstimate


def mc_swaption(inputs: SwaptionInputs, n_paths: int, seed: int) -> SwaptionMC:
    """Discounted payoffs under a driftless lognormal floating rate at expiry."""
    sd = inputs.sigma * math.sqrt(inputs.expiry)
    put, call = RunningMoments(), RunningMoments()
    for start, m in chunks(n_paths, 200_000):
        z = standard_normals(seed, m, 1, start=start)[:, 0]
        ft = inputs.forward * np.exp(-0.5 * sd * sd + sd * z)
        call.update(inputs.discount * np.maximum(ft - inputs.strike_rate, 0.0))
        put.update(inputs.discount * np.maximum(inputs.strike_rate - ft, 0.0))
    return SwaptionMC(put.result(), call.result())


@dataclass(frozen=True)
class ForwardEstimate:
    """``F = -E[β₁(τ) c]`` over paths that crashed within the horizon."""

    forward: float
    std_error: float
    n_hit: int
    n_paths: int
    mean_tau: float


def estimate_floating_forward(
    beta1: Callable[[np.ndarray], np.ndarray] | np.ndarray,
    c: float,
    spec: CrashSpec,
    grid: TimeGrid,
    n_paths: int,
    seed: int,
) -> ForwardEstimate:
    """Monte Carlo estimate of the floating forward from sampled crash times.

    ``beta1`` is either one value per grid point or a function of time.
    """
    taus, _ = stopping_times(spec, grid, n_paths, seed)
    hit = ~np.isnan(taus)
    if hit.sum() < 2:
        raise ValueError("fewer than two crashes within the horizon")
    tau = taus[hit]
    if callable(beta1):
        b = np.asarray(beta1(tau), dtype=float)
    else:
        b = np.asarray(beta1, dtype=float)
        if b.shape != (len(grid),):
            raise ValueError("beta1 must have one value per grid point")
        b = b[np.searchsorted(grid.points, tau)]
    est = mc_mean(-b * c)
    return ForwardEstimate(est.estimate, est.std_error, int(hit.sum()), n_paths, float(tau.mean()))


def discount_from_mean_tau(r: float, mean_tau: float) -> float:
    """``P(0, τ) ≈ exp(-r E[τ])``."""
    if mean_tau < 0:
        raise ValueError("mean stopping time must be >= 0")
    return math.exp(-r * mean_tau)
