"""Brownian motion, geometric Brownian motion and the alpha bridge.

The trade-strategy alpha is simulated in three ways:

* ``paper_sde``: Euler-Maruyama on ``dγ = x/(1-t) dt - dB`` with ``γ(0) = x``.
  The drift numerator is the *constant* starting level, so this process does
  not pin anywhere at ``t = 1``; its value there is undefined.
* ``pinned``: Euler-Maruyama on ``dX = (pin - X)/(1-t) dt + dB``, the
  classical state-dependent bridge, which pins at ``pin``.
* Doob transform: ``G(t) = (1-t) B(t/(1-t))`` from a Brownian path sampled on
  the image clock.

Both Euler schemes stop at ``1 - eps`` because the drift is singular at 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .rng import SeedRecord, chunk_size_for, chunks, standard_normals

__all__ = [
    "DEFAULT_EPS",
    "SingularityError",
    "TimeGrid",
    "SamplePath",
    "BridgeSpec",
    "GbmParams",
    "brownian_increments",
    "running_sum",
    "brownian_paths",
    "sample_brownian",
    "bridge_paper_sde_from_increments",
    "bridge_paper_sde_paths",
    "sample_bridge_paper_sde",
    "bridge_pinned_from_increments",
    "bridge_pinned_paths",
    "sample_bridge_pinned",
    "bridge_terminal_value",
    "doob_image_grid",
    "doob_transform_values",
    "doob_transform_bridge",
    "doob_bridge_paths",
    "gbm_from_brownian",
    "gbm_paths",
    "sample_gbm",
    "dds_clock",
    "dds_inverse",
]

DEFAULT_EPS = 1e-4


class SingularityError(ValueError):
    """A grid reaches a point where a 1/(1-t) coefficient blows up."""


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Strictly increasing simulation times starting at 0."""

    points: np.ndarray

    def __post_init__(self) -> None:
        p = _frozen(self.points)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("time grid must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(p)):
            raise ValueError("time grid must be finite")
        if p[0] != 0.0:
            raise ValueError("time grid must start at 0")
        if p.size > 1 and np.any(np.diff(p) <= 0):
            raise ValueError("time grid must be strictly increasing")
        object.__setattr__(self, "points", p)

    @classmethod
    def uniform(cls, n_steps: int, horizon: float = 1.0) -> "TimeGrid":
        if n_steps < 0:
            raise ValueError("n_steps must be non-negative")
        if n_steps > 0 and horizon <= 0:
            raise ValueError("horizon must be positive")
        return cls(np.linspace(0.0, horizon, n_steps + 1))

    @classmethod
    def bridge(cls, n_steps: int, eps: float = DEFAULT_EPS) -> "TimeGrid":
        """Uniform grid on ``[0, 1 - eps]``."""
        if not 0.0 < eps < 1.0:
            raise ValueError("eps must lie in (0, 1)")
        return cls.uniform(n_steps, 1.0 - eps)

    @property
    def n_steps(self) -> int:
        return self.points.size - 1

    @property
    def horizon(self) -> float:
        return float(self.points[-1])

    @property
    def dt(self) -> np.ndarray:
        return np.diff(self.points)

    def __len__(self) -> int:
        return self.points.size

    def __eq__(self, other) -> bool:
        return isinstance(other, TimeGrid) and np.array_equal(self.points, other.points)

    def __hash__(self) -> int:
        return hash(self.points.tobytes())

    def index_of(self, t: float, rtol: float = 1e-12) -> int:
        """Index of the grid point equal to ``t`` (within ``rtol``)."""
        i = int(np.searchsorted(self.points, t))
        for j in (i - 1, i):
            if 0 <= j < self.points.size and math.isclose(
                self.points[j], t, rel_tol=rtol, abs_tol=rtol
            ):
                return j
        raise KeyError(f"t={t} is not a grid point")

    def coarsen(self, factor: int) -> "TimeGrid":
        """Every ``factor``-th point (the last point must survive)."""
        if self.n_steps % factor:
            raise ValueError("factor must divide the step count")
        return TimeGrid(self.points[::factor])

    def require_below_one(self) -> None:
        if self.points[-1] >= 1.0:
            raise SingularityError(
                f"grid reaches t={self.points[-1]}; the 1/(1-t) drift is singular at 1"
            )


@dataclass(frozen=True, eq=False)
class SamplePath:
    """One trajectory on a grid.  Values are read-only."""

    grid: TimeGrid
    values: np.ndarray
    seed: SeedRecord | None = None
    kind: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        v = _frozen(self.values)
        if v.shape != self.grid.points.shape:
            raise ValueError(
                f"values length {v.size} does not match grid length {len(self.grid)}"
            )
        object.__setattr__(self, "values", v)

    @property
    def times(self) -> np.ndarray:
        return self.grid.points

    @property
    def terminal(self) -> float:
        return float(self.values[-1])

    def at(self, t: float) -> float:
        return float(self.values[self.grid.index_of(t)])

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class BridgeSpec:
    """Alpha bridge parameters: start level (hurdle) ``x`` and pin target."""

    x: float
    pin: float = 0.0
    horizon: float = 1.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.x) or self.x < 0:
            raise ValueError("bridge start level x must be finite and >= 0")
        if not math.isfinite(self.pin):
            raise ValueError("pin must be finite")
        if self.horizon != 1.0:
            raise ValueError("the alpha bridge lives on [0, 1]")


@dataclass(frozen=True)
class GbmParams:
    """dS/S = mu dt + sigma dB, S(0) = s0."""

    mu: float
    sigma: float
    s0: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma) and math.isfinite(self.s0)):
            raise ValueError("GBM parameters must be finite")
        if self.sigma <= 0:
            raise ValueError("sigma must be > 0 (a crash needs volatility)")
        if self.s0 <= 0:
            raise ValueError("s0 must be > 0")

    @property
    def log_drift(self) -> float:
        """nu = mu - sigma^2 / 2."""
        return self.mu - 0.5 * self.sigma * self.sigma


# --------------------------------------------------------------------------
# Brownian motion


def brownian_increments(
    grid: TimeGrid,
    n_paths: int,
    seed: int,
    *,
    start: int = 0,
    antithetic: bool = False,
) -> np.ndarray:
    """Increments ``B(t_{i+1}) - B(t_i)``, shape ``(n_paths, n_steps)``."""
    z = standard_normals(seed, n_paths, grid.n_steps, start=start, antithetic=antithetic)
    z *= np.sqrt(grid.dt)
    return z


def running_sum(first: float | np.ndarray, inc: np.ndarray) -> np.ndarray:
    """Running sum starting at ``first``; sequential, so it matches a plain loop."""
    n_paths = inc.shape[0]
    out = np.empty((n_paths, inc.shape[1] + 1))
    out[:, 0] = first
    out[:, 1:] = inc
    np.cumsum(out, axis=1, out=out)
    return out


def brownian_paths(
    grid: TimeGrid,
    n_paths: int,
    seed: int,
    *,
    start: int = 0,
    antithetic: bool = False,
) -> np.ndarray:
    """Brownian paths from 0, shape ``(n_paths, len(grid))``.

    Row ``k`` equals ``sample_brownian(grid, seed, path_index=start + k).values``.
    """
    return running_sum(0.0, brownian_increments(grid, n_paths, seed, start=start, antithetic=antithetic))


def sample_brownian(grid: TimeGrid, seed: int, path_index: int = 0) -> SamplePath:
    values = brownian_paths(grid, 1, seed, start=path_index)[0]
    return SamplePath(grid, values, SeedRecord(seed, path_index), kind="brownian")


# --------------------------------------------------------------------------
# Alpha bridge, constant-numerator drift


def bridge_paper_sde_from_increments(x: float, grid: TimeGrid, dB: np.ndarray) -> np.ndarray:
    """Euler-Maruyama for ``dγ = x/(1-t) dt - dB``, ``γ(0) = x``.

    ``dB`` has shape ``(n_steps,)`` or ``(n_paths, n_steps)``.
    """
    grid.require_below_one()
    dB = np.atleast_2d(dB)
    t = grid.points[:-1]
    drift = x / (1.0 - t) * grid.dt
    out = running_sum(x, drift - dB)
    return out


def bridge_paper_sde_paths(
    spec: BridgeSpec, grid: TimeGrid, n_paths: int, seed: int, *, start: int = 0
) -> np.ndarray:
    dB = brownian_increments(grid, n_paths, seed, start=start)
    return bridge_paper_sde_from_increments(spec.x, grid, dB)


def sample_bridge_paper_sde(
    spec: BridgeSpec, grid: TimeGrid, seed: int, path_index: int = 0
) -> SamplePath:
    values = bridge_paper_sde_paths(spec, grid, 1, seed, start=path_index)[0]
    return SamplePath(
        grid, values, SeedRecord(seed, path_index), kind="bridge_paper_sde", meta={"x": spec.x}
    )


# --------------------------------------------------------------------------
# Alpha bridge, state-dependent (pinned) drift


def bridge_pinned_from_increments(
    start: float, pin: float, grid: TimeGrid, dB: np.ndarray
) -> np.ndarray:
    """Euler-Maruyama for ``dX = (pin - X)/(1-t) dt + dB``, ``X(0) = start``."""
    grid.require_below_one()
    dB = np.atleast_2d(dB)
    n_paths, n_steps = dB.shape
    if n_steps != grid.n_steps:
        raise ValueError("increments do not match the grid")
    t = grid.points
    h = grid.dt
    out = np.empty((n_paths, n_steps + 1))
    x = np.full(n_paths, float(start))
    out[:, 0] = x
    for i in range(n_steps):
        x = x + (pin - x) * (h[i] / (1.0 - t[i])) + dB[:, i]
        out[:, i + 1] = x
    return out


def bridge_pinned_paths(
    start: float, pin: float, grid: TimeGrid, n_paths: int, seed: int, *, first: int = 0
) -> np.ndarray:
    out = np.empty((n_paths, len(grid)))
    for s, m in chunks(n_paths, chunk_size_for(len(grid))):
        dB = brownian_increments(grid, m, seed, start=first + s)
        out[s : s + m] = bridge_pinned_from_increments(start, pin, grid, dB)
    return out


def sample_bridge_pinned(
    start: float, pin: float, grid: TimeGrid, seed: int, path_index: int = 0
) -> SamplePath:
    values = bridge_pinned_paths(start, pin, grid, 1, seed, first=path_index)[0]
    return SamplePath(
        grid,
        values,
        SeedRecord(seed, path_index),
        kind="bridge_pinned",
        meta={"start": start, "pin": pin},
    )


def bridge_terminal_value(kind: str, pin: float | None = None) -> float | None:
    """Value reported at exactly ``t = 1``.

    The pinned bridge is the pin by construction.  The constant-numerator
    SDE has no limit there, so ``None`` (undefined) is returned.
    """
    if kind == "pinned":
        if pin is None:
            raise ValueError("pinned bridge needs its pin")
        return float(pin)
    if kind == "paper_sde":
        return None
    raise ValueError(f"unknown bridge kind {kind!r}")


# --------------------------------------------------------------------------
# Doob transform


def doob_image_grid(bridge_grid: TimeGrid) -> TimeGrid:
    """Brownian clock ``u = s/(1-s)`` on which to sample B for a bridge grid."""
    s = bridge_grid.points
    if s[-1] >= 1.0:
        raise SingularityError("Doob transform needs bridge times < 1")
    return TimeGrid(s / (1.0 - s))


def doob_transform_values(image_grid: TimeGrid, bm_values: np.ndarray) -> tuple[TimeGrid, np.ndarray]:
    """Map B on the image clock to ``G(s) = (1-s) B(s/(1-s)) = B(u)/(1+u)``."""
    u = image_grid.points
    if not np.all(np.isfinite(u)):
        raise SingularityError("image clock must be finite")
    s = u / (1.0 + u)
    return TimeGrid(s), np.asarray(bm_values) / (1.0 + u)


def doob_transform_bridge(bm: SamplePath) -> SamplePath:
    grid, values = doob_transform_values(bm.grid, bm.values)
    return SamplePath(grid, values, bm.seed, kind="bridge_doob")


def doob_bridge_paths(
    bridge_grid: TimeGrid, n_paths: int, seed: int, *, start: int = 0
) -> tuple[TimeGrid, np.ndarray]:
    """Bridge paths 0 -> 0 on ``bridge_grid`` via the Doob transform."""
    image = doob_image_grid(bridge_grid)
    bm = brownian_paths(image, n_paths, seed, start=start)
    # scale by (1 - s) on the requested grid; s -> u -> s can move the last bits
    return bridge_grid, bm * (1.0 - bridge_grid.points)


# --------------------------------------------------------------------------
# Geometric Brownian motion


def gbm_from_brownian(params: GbmParams, grid: TimeGrid, bm: np.ndarray) -> np.ndarray:
    """Exact solution ``S(t) = s0 exp(nu t + sigma B(t))`` along given B values."""
    bm = np.asarray(bm, dtype=float)
    return params.s0 * np.exp(params.log_drift * grid.points + params.sigma * bm)


def gbm_paths(
    params: GbmParams,
    grid: TimeGrid,
    n_paths: int,
    seed: int,
    *,
    start: int = 0,
    antithetic: bool = False,
) -> np.ndarray:
    bm = brownian_paths(grid, n_paths, seed, start=start, antithetic=antithetic)
    return gbm_from_brownian(params, grid, bm)


def sample_gbm(params: GbmParams, grid: TimeGrid, seed: int, path_index: int = 0) -> SamplePath:
    values = gbm_paths(params, grid, 1, seed, start=path_index)[0]
    return SamplePath(grid, values, SeedRecord(seed, path_index), kind="gbm")


# --------------------------------------------------------------------------
# Dambis-Dubins-Schwarz clock of M(t) = ∫ dB/(1-s)


def dds_clock(t):
    """Quadratic variation ``∫_0^t (1-s)^-2 ds = t/(1-t)`` for ``0 <= t < 1``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t >= 1):
        raise SingularityError("DDS clock is defined on [0, 1)")
    out = t / (1.0 - t)
    return float(out) if out.ndim == 0 else out


def dds_inverse(s):
    """Inverse clock ``T(s) = s/(1+s)``: the time at which ``<M>`` reaches s."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("clock value must be non-negative")
    out = s / (1.0 + s)
    return float(out) if out.ndim == 0 else out


def grid_from(points: Sequence[float] | TimeGrid) -> TimeGrid:
    return points if isinstance(points, TimeGrid) else TimeGrid(np.asarray(points, dtype=float))
