"""Girsanov reweighting for the bridge drift θ(s) = x/(1-s).

Two densities are available.  ``standard`` is the exponential martingale

    M(t) = exp(∫ θ dB - ½ ∫ θ² ds)

and ``paper_literal`` drops the ½ from the exponent.  The literal version is not a martingale; its mean is
``exp(-½ ∫ θ² ds)``.  Every output carries the variant label.

Stochastic integrals are left-point (Itô) sums on the grid of the driving
path, and the Q-Brownian motion subtracts the matching left Riemann sum of
θ, so the discrete change of measure is exact.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .paths import SamplePath, TimeGrid, brownian_paths
from .rng import chunk_size_for, chunks
from .stats import RunningMoments

VARIANTS = ("standard", "paper_literal")


@dataclass(frozen=True)
class GirsanovSpec:
    x: float
    variant: str = "standard"

    def __post_init__(self) -> None:
        if not math.isfinite(self.x):
            raise ValueError("x must be finite")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")


def theta(x: float, t: np.ndarray) -> np.ndarray:
    return x / (1.0 - np.asarray(t, dtype=float))


def drift_integral(grid: TimeGrid, x: float) -> np.ndarray:
    """Left Riemann sums of θ on the grid, starting at 0."""
    grid.require_below_one()
    th = theta(x, grid.points[:-1])
    return np.concatenate(([0.0], np.cumsum(th * grid.dt)))


def energy_integral(grid: TimeGrid, x: float) -> np.ndarray:
    """Left Riemann sums of θ² on the grid, starting at 0."""
    grid.require_below_one()
    th = theta(x, grid.points[:-1])
    return np.concatenate(([0.0], np.cumsum(th * th * grid.dt)))


def log_density_values(grid: TimeGrid, bm: np.ndarray, spec: GirsanovSpec) -> np.ndarray:
    """log M along each row of Brownian values ``bm`` (shape ``(..., len(grid))``)."""
    grid.require_below_one()
    bm = np.atleast_2d(np.asarray(bm, dtype=float))
    th = theta(spec.x, grid.points[:-1])
    ito = np.zeros_like(bm)
    np.cumsum(th * np.diff(bm, axis=1), axis=1, out=ito[:, 1:])
    half = 0.5 if spec.variant == "standard" else 1.0
    return ito - half * energy_integral(grid, spec.x)


def density_values(grid: TimeGrid, bm: np.ndarray, spec: GirsanovSpec) -> np.ndarray:
    return np.exp(log_density_values(grid, bm, spec))


def girsanov_density(bm: SamplePath, spec: GirsanovSpec) -> SamplePath:
    """Density path M(t) for one Brownian path."""
    m = density_values(bm.grid, bm.values, spec)[0]
    return SamplePath(
        bm.grid, m, bm.seed, kind="girsanov_density", meta={"x": spec.x, "variant": spec.variant}
    )


def literal_to_standard_ratio(grid: TimeGrid, x: float) -> np.ndarray:
    """Deterministic factor ``exp(-½ ∫ θ² ds)`` separating the two variants."""
    return np.exp(-0.5 * energy_integral(grid, x))


def q_brownian_values(grid: TimeGrid, bm: np.ndarray, x: float) -> np.ndarray:
    """B̂(t) = B(t) - ∫ θ ds, a Brownian motion under Q."""
    return np.asarray(bm, dtype=float) - drift_integral(grid, x)


@dataclass(frozen=True)
class QEstimate:
    variant: str
    x: float
    t: float
    estimate: float
    std_error: float
    n_paths: int
    seed: int

    def as_record(self) -> dict:
        return asdict(self)


def q_expectation(
    functional: Callable,
    n_paths: int,
    spec: GirsanovSpec,
    grid: TimeGrid,
    seed: int,
    *,
    vectorized: bool = False,
) -> QEstimate:
    """Estimate E_Q[f(B̂)] as E_P[M(T) f(B̂)] by simulating B under P.

    ``functional`` receives the B̂ path as a :class:`SamplePath`, or, with
    ``vectorized=True``, the grid and a ``(paths, points)`` array and must
    return one value per row.
    """
    if n_paths < 2:
        raise ValueError("need at least two paths for a standard error")
    grid.require_below_one()
    acc = RunningMoments()
    for start, count in chunks(n_paths, chunk_size_for(len(grid))):
        bm = brownian_paths(grid, count, seed, start=start)
        weight = np.exp(log_density_values(grid, bm, spec)[:, -1])
        bhat = q_brownian_values(grid, bm, spec.x)
        if vectorized:
            f = np.asarray(functional(grid, bhat), dtype=float)
        else:
            f = np.array([float(functional(SamplePath(grid, row))) for row in bhat])
        if f.shape != (count,):
            raise ValueError("functional must return one value per path")
        if not np.all(np.isfinite(f)):
            raise ValueError("functional returned non-finite values")
        acc.update(weight * f)
    est = acc.result()
    return QEstimate(spec.variant, spec.x, grid.horizon, est.estimate, est.std_error, n_paths, seed)
