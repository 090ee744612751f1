"""Down-and-in put as the hedge against a crash to the barrier ``S_E``.

Closed forms assume continuous monitoring and European exercise with a
continuous dividend yield ``q``:

* down-and-in put, Hull's formula for ``H < K``;
* down-and-out put, the Reiner-Rubinstein ``A - B + C - D`` decomposition;
* vanilla Black-Scholes-Merton put.

The contract is also read American-style, paying the intrinsic value at the
hitting time; that reading only has a Monte Carlo evaluator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy.special import ndtr

from ..crash import BGK_BETA
from ..paths import GbmParams
from ..rng import chunk_size_for, chunks, standard_normals
from ..stats import MCEstimate, RunningMoments

SIDES = ("down_in_put", "down_out_put", "vanilla_put")


class AlreadyKnockedIn(ValueError):
    """The barrier is at or above the spot: the put is already active."""


@dataclass(frozen=True)
class BarrierOptionSpec:
    gbm: GbmParams
    strike: float
    barrier: float
    rate: float
    maturity: float
    dividend_yield: float = 0.0
    side: str = "down_in_put"

    def __post_init__(self) -> None:
        if self.side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}, got {self.side!r}")
        if self.strike <= 0:
            raise ValueError("strike must be > 0")
        if self.barrier <= 0:
            raise ValueError("barrier must be > 0")
        if self.maturity <= 0:
            raise ValueError("maturity must be > 0")
        if self.dividend_yield < 0:
            raise ValueError("dividend yield must be >= 0")
        if self.barrier >= self.gbm.s0:
            raise AlreadyKnockedIn("barrier must lie below the spot (S_E < s0)")
        if self.barrier >= self.strike:
            raise ValueError("barrier must lie below the strike (S_E < K)")

    @property
    def spot(self) -> float:
        return self.gbm.s0

    @property
    def sigma(self) -> float:
        return self.gbm.sigma


def bsm_put(spot: float, strike: float, rate: float, q: float, sigma: float, T: float) -> float:
    sd = sigma * math.sqrt(T)
    d1 = (math.log(spot / strike) + (rate - q + 0.5 * sigma * sigma) * T) / sd
    d2 = d1 - sd
    return strike * math.exp(-rate * T) * ndtr(-d2) - spot * math.exp(-q * T) * ndtr(-d1)


def _common(spec: BarrierOptionSpec):
    S, K, H = spec.spot, spec.strike, spec.barrier
    r, q, sig, T = spec.rate, spec.dividend_yield, spec.sigma, spec.maturity
    sd = sig * math.sqrt(T)
    lam = (r - q + 0.5 * sig * sig) / (sig * sig)
    return S, K, H, r, q, sd, lam, T


def down_and_in_put_price(spec: BarrierOptionSpec) -> float:
    S, K, H, r, q, sd, lam, T = _common(spec)
    dq, dr = math.exp(-q * T), math.exp(-r * T)
    ratio = H / S
    y = math.log(H * H / (S * K)) / sd + lam * sd
    x1 = math.log(S / H) / sd + lam * sd
    y1 = math.log(H / S) / sd + lam * sd
    return (
        -S * ndtr(-x1) * dq
        + K * dr * ndtr(-x1 + sd)
        + S * dq * ratio ** (2 * lam) * (ndtr(y) - ndtr(y1))
        - K * dr * ratio ** (2 * lam - 2) * (ndtr(y - sd) - ndtr(y1 - sd))
    )


def down_and_out_put_price(spec: BarrierOptionSpec) -> float:
    S, K, H, r, q, sd, lam, T = _common(spec)
    dq, dr = math.exp(-q * T), math.exp(-r * T)
    ratio = H / S
    xk = math.log(S / K) / sd + lam * sd
    xh = math.log(S / H) / sd + lam * sd
    yk = math.log(H * H / (S * K)) / sd + lam * sd
    yh = math.log(H / S) / sd + lam * sd

    a = -S * dq * ndtr(-xk) + K * dr * ndtr(-xk + sd)
    b = -S * dq * ndtr(-xh) + K * dr * ndtr(-xh + sd)
    c = -S * dq * ratio ** (2 * lam) * ndtr(yk) + K * dr * ratio ** (2 * lam - 2) * ndtr(yk - sd)
    d = -S * dq * ratio ** (2 * lam) * ndtr(yh) + K * dr * ratio ** (2 * lam - 2) * ndtr(yh - sd)
    return a - b + c - d


def vanilla_put_price(spec: BarrierOptionSpec) -> float:
    return bsm_put(spec.spot, spec.strike, spec.rate, spec.dividend_yield, spec.sigma, spec.maturity)


def price(spec: BarrierOptionSpec) -> float:
    """Closed-form price for the spec's ``side``."""
    if spec.side == "down_in_put":
        return down_and_in_put_price(spec)
    if spec.side == "down_out_put":
        return down_and_out_put_price(spec)
    return vanilla_put_price(spec)


def barrier_payoff(
    spec: BarrierOptionSpec, s_at_tau: float, s_now: float, option: str = "put"
) -> float:
    """Gated intrinsic value at the crash time.

    put:  ``(K - S(τ))⁺ · 1{S_E < S(t) < K}``
    call: ``(S(τ) - K)⁺ · 1{S_E < K < S(t)}``
    """
    if s_at_tau <= 0 or s_now <= 0:
        raise ValueError("prices must be > 0")
    K, H = spec.strike, spec.barrier
    if option == "put":
        return max(K - s_at_tau, 0.0) if H < s_now < K else 0.0
    if option == "call":
        return max(s_at_tau - K, 0.0) if H < K < s_now else 0.0
    raise ValueError(f"option must be 'put' or 'call', got {option!r}")


def monitoring_bias_estimate(spec: BarrierOptionSpec, n_steps: int) -> float:
    """Closed-form shift from continuous to ``n_steps``-date monitoring (negative)."""
    shift = math.exp(-BGK_BETA * spec.sigma * math.sqrt(spec.maturity / n_steps))
    return down_and_in_put_price(replace(spec, barrier=spec.barrier * shift)) - down_and_in_put_price(spec)


def greeks(spec: BarrierOptionSpec, rel_bump: float = 1e-4) -> dict:
    """Central finite-difference delta and vega of the closed-form price."""
    hs = spec.spot * rel_bump
    up = replace(spec, gbm=replace(spec.gbm, s0=spec.spot + hs))
    dn = replace(spec, gbm=replace(spec.gbm, s0=spec.spot - hs))
    delta = (price(up) - price(dn)) / (2 * hs)
    hv = spec.sigma * rel_bump
    up = replace(spec, gbm=replace(spec.gbm, sigma=spec.sigma + hv))
    dn = replace(spec, gbm=replace(spec.gbm, sigma=spec.sigma - hv))
    vega = (price(up) - price(dn)) / (2 * hv)
    return {"delta": delta, "vega": vega}


class BarrierMC(NamedTuple):
    european: MCEstimate
    american_at_hit: MCEstimate
    down_out: MCEstimate
    vanilla: MCEstimate
    knock_in_rate: float
    monitoring_bias_estimate: float
    n_steps: int


def mc_down_and_in_put(
    spec: BarrierOptionSpec,
    n_paths: int,
    n_steps: int,
    seed: int,
    *,
    antithetic: bool = False,
) -> BarrierMC:
    """Monte Carlo under the risk-neutral drift with discrete monitoring.

    ``european`` pays ``e^{-rT}(K - S_T)⁺`` if the monitored minimum reached
    the barrier; ``american_at_hit`` pays ``e^{-rτ}`` times the gated
    intrinsic value at the first monitored hit.  The knock-out and vanilla
    payoffs come from the same paths.
    """
    S0, K, H = spec.spot, spec.strike, spec.barrier
    r, sig, T = spec.rate, spec.sigma, spec.maturity
    dt = T / n_steps
    drift = (r - spec.dividend_yield - 0.5 * sig * sig) * dt
    vol = sig * math.sqrt(dt)
    log_h = math.log(H / S0)
    times = dt * np.arange(1, n_steps + 1)
    eur, ame, out, van = RunningMoments(), RunningMoments(), RunningMoments(), RunningMoments()
    hits = 0
    for start, m in chunks(n_paths, chunk_size_for(n_steps)):
        x = standard_normals(seed, m, n_steps, start=start, antithetic=antithetic)
        x *= vol
        x += drift
        np.cumsum(x, axis=1, out=x)
        below = x <= log_h
        hit = below.any(axis=1)
        hits += int(hit.sum())
        ST = S0 * np.exp(x[:, -1])
        put = math.exp(-r * T) * np.maximum(K - ST, 0.0)
        eur.update(put * hit)
        out.update(put * ~hit)
        van.update(put)
        first = np.argmax(below, axis=1)
        s_tau = S0 * np.exp(x[np.arange(m), first])
        gate = 1.0 if H < S0 < K else 0.0
        pay = np.where(hit, np.exp(-r * times[first]) * np.maximum(K - s_tau, 0.0) * gate, 0.0)
        ame.update(pay)
    return BarrierMC(
        eur.result(),
        ame.result(),
        out.result(),
        van.result(),
        hits / n_paths,
        monitoring_bias_estimate(spec, n_steps),
        n_steps,
    )
