"""Local time of the alpha process and the measure of its zero set.

Normalization: Tanaka's formula is written for ``2L``,

    2L(t, x) = |W(t) - x| - |W(0) - x| - ∫_0^t sgn(W(s) - x) dW(s),

and this module reports ``L``, i.e. half of the semimartingale local time.
The occupation-density limit ``(1/2ε) Leb{s <= t : |W(s) - x| < ε}``
converges to the semimartingale local time ``2L``; :func:`occupation_density`
returns that raw quantity and :func:`occupation_local_time` halves it so it
is directly comparable with :func:`tanaka_local_time`.

Conventions: the free constant in Tanaka's formula is the starting value
``W(0)`` so that ``L(0, x) = 0``, ``sgn(0) = 0``, and the stochastic integral
is a left-point sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .paths import SamplePath, TimeGrid, bridge_pinned_from_increments, brownian_increments, running_sum
from .rng import chunk_size_for, chunks
from .stats import RunningMoments

DEFAULT_EPSILON = 1e-2


@dataclass(frozen=True)
class LocalTimeEstimate:
    level: float
    time: float
    tanaka_value: float
    occupation_value: float
    epsilon: float
    n_steps: int

    @property
    def semimartingale_value(self) -> float:
        """2L, the quantity on the left of Tanaka's formula."""
        return 2.0 * self.tanaka_value


@dataclass(frozen=True)
class ZeroSetReport:
    level: float
    tolerance: float
    lebesgue_measure_estimate: float
    path_variance: float


class AlphaTestResult(NamedTuple):
    variance_estimate: float
    fraction_time_at_zero: float
    variance_std_error: float
    degenerate: bool


def _as_2d(values) -> np.ndarray:
    return np.atleast_2d(np.asarray(values, dtype=float))


def tanaka_values(values, x: float) -> np.ndarray:
    """Running ``L(t_k, x)`` along each row of ``values``."""
    w = _as_2d(values)
    if w.shape[1] < 2:
        raise ValueError("Tanaka estimator needs at least two points")
    centred = w - x
    integral = np.zeros_like(w)
    np.cumsum(np.sign(centred[:, :-1]) * np.diff(w, axis=1), axis=1, out=integral[:, 1:])
    two_l = np.abs(centred) - np.abs(centred[:, :1]) - integral
    return 0.5 * two_l


def tanaka_terminal(values, x: float) -> np.ndarray:
    """``L(T, x)`` per row without storing the running path."""
    w = _as_2d(values)
    if w.shape[1] < 2:
        raise ValueError("Tanaka estimator needs at least two points")
    c = w - x
    integral = np.einsum("ij,ij->i", np.sign(c[:, :-1]), np.diff(w, axis=1))
    return 0.5 * (np.abs(c[:, -1]) - np.abs(c[:, 0]) - integral)


def occupation_time(grid: TimeGrid, values, x: float, epsilon: float) -> np.ndarray:
    """Left-point Riemann estimate of ``Leb{s <= T : |W(s) - x| < ε}`` per row."""
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    w = _as_2d(values)
    inside = np.abs(w[:, :-1] - x) < epsilon
    return inside.astype(float) @ grid.dt


def occupation_density(path: SamplePath, x: float, epsilon: float = DEFAULT_EPSILON) -> float:
    """``(1/2ε) Leb{|W - x| < ε}``: converges to the semimartingale local time 2L."""
    return float(occupation_time(path.grid, path.values, x, epsilon)[0] / (2.0 * epsilon))


def occupation_local_time(path: SamplePath, x: float, epsilon: float = DEFAULT_EPSILON) -> float:
    """Occupation estimate of ``L`` (same normalization as the Tanaka estimate)."""
    return 0.5 * occupation_density(path, x, epsilon)


def tanaka_local_time(
    path: SamplePath, x: float, epsilon: float = DEFAULT_EPSILON
) -> LocalTimeEstimate:
    """Tanaka local time at the end of ``path``, with the occupation cross-check."""
    if len(path) < 2:
        raise ValueError("Tanaka estimator needs at least two points")
    return LocalTimeEstimate(
        level=float(x),
        time=path.grid.horizon,
        tanaka_value=float(tanaka_terminal(path.values, x)[0]),
        occupation_value=occupation_local_time(path, x, epsilon),
        epsilon=float(epsilon),
        n_steps=path.grid.n_steps,
    )


def band_measure(grid: TimeGrid, values, x: float, tol: float) -> np.ndarray:
    """Trapezoidal measure of ``{t : |W(t) - x| <= tol}`` per row."""
    if tol <= 0:
        raise ValueError("tol must be > 0")
    ind = (np.abs(_as_2d(values) - x) <= tol).astype(float)
    return 0.5 * (ind[:, :-1] + ind[:, 1:]) @ grid.dt


def time_second_moment(grid: TimeGrid, values) -> np.ndarray:
    """Time average of ``W(t)^2`` (trapezoid) per row."""
    sq = _as_2d(values) ** 2
    return (0.5 * (sq[:, :-1] + sq[:, 1:]) @ grid.dt) / grid.horizon


def zero_set_measure(path: SamplePath, x: float, tol: float) -> ZeroSetReport:
    """Time spent within ``tol`` of level ``x``, plus the path's second moment.

    The level set is read as a set of times ``{t : W(t) = x}``; its Lebesgue
    measure is zero, so the band measure shrinks with ``tol`` (roughly
    ``2 tol`` times the semimartingale local time).
    """
    if len(path) < 2:
        raise ValueError("need at least two points")
    return ZeroSetReport(
        level=float(x),
        tolerance=float(tol),
        lebesgue_measure_estimate=float(band_measure(path.grid, path.values, x, tol)[0]),
        path_variance=float(time_second_moment(path.grid, path.values)[0]),
    )


def alpha_nonzero_values(grid: TimeGrid, values, tol: float = 1e-3) -> AlphaTestResult:
    """Pooled second moment of alpha paths and mean fraction of time near zero.

    A non-zero alpha shows up as a second moment bounded away from zero while
    the fraction of time spent within ``tol`` of zero vanishes with ``tol``.
    Identically-zero input is flagged as degenerate.
    """
    w = _as_2d(values)
    if w.shape[0] < 2:
        raise ValueError("need at least two paths")
    if w.shape[1] < 2:
        raise ValueError("need at least two grid points")
    per_path = time_second_moment(grid, w)
    frac = band_measure(grid, w, 0.0, tol) / grid.horizon
    se = float(per_path.std(ddof=1) / np.sqrt(per_path.size))
    return AlphaTestResult(
        variance_estimate=float(per_path.mean()),
        fraction_time_at_zero=float(frac.mean()),
        variance_std_error=se,
        degenerate=bool(np.all(w == 0.0)),
    )


def alpha_nonzero_test(paths: Sequence[SamplePath], tol: float = 1e-3) -> AlphaTestResult:
    if len(paths) == 0:
        raise ValueError("no paths")
    grid = paths[0].grid
    if any(p.grid != grid for p in paths):
        raise ValueError("all paths must share a grid")
    return alpha_nonzero_values(grid, np.stack([p.values for p in paths]), tol)


# --------------------------------------------------------------------------
# Monte Carlo sweeps


@dataclass(frozen=True)
class SweepRow:
    level: float
    time: float
    tanaka: float
    tanaka_se: float
    occupation: float
    occupation_se: float


@dataclass(frozen=True)
class BandRow:
    level: float
    tolerance: float
    measure: float
    measure_se: float


@dataclass(frozen=True)
class LocalTimeSweep:
    rows: list[SweepRow]
    bands: list[BandRow]
    n_paths: int
    n_steps: int
    epsilon: float
    process: str


def local_time_sweep(
    grid: TimeGrid,
    n_paths: int,
    seed: int,
    levels: Sequence[float],
    *,
    times: Sequence[float] | None = None,
    epsilon: float = DEFAULT_EPSILON,
    tols: Sequence[float] = (),
    process: str = "brownian",
) -> LocalTimeSweep:
    """Mean Tanaka and occupation local times over simulated paths.

    ``process`` is ``"brownian"`` (from 0) or ``"bridge"`` (pinned 0 -> 0, grid
    must end below 1).  Band measures at every ``tol`` are taken over the full
    grid.
    """
    if process not in ("brownian", "bridge"):
        raise ValueError(f"unknown process {process!r}")
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    times = [grid.horizon] if times is None else list(times)
    idx = [grid.index_of(t) for t in times]
    if any(i == 0 for i in idx):
        raise ValueError("local time at t = 0 is identically zero; pick t > 0")
    levels = [float(v) for v in levels]
    tan = {(x, i): RunningMoments() for x in levels for i in idx}
    occ = {(x, i): RunningMoments() for x in levels for i in idx}
    band = {(x, tol): RunningMoments() for x in levels for tol in tols}
    dt = grid.dt
    for start, count in chunks(n_paths, chunk_size_for(len(grid), 2_000_000)):
        dB = brownian_increments(grid, count, seed, start=start)
        if process == "brownian":
            w = running_sum(0.0, dB)
        else:
            w = bridge_pinned_from_increments(0.0, 0.0, grid, dB)
        dw = np.diff(w, axis=1)
        for x in levels:
            c = w - x
            sgn_dw = np.cumsum(np.sign(c[:, :-1]) * dw, axis=1)
            near = (np.abs(c[:, :-1]) < epsilon) * dt
            occ_cum = np.cumsum(near, axis=1)
            for i in idx:
                two_l = np.abs(c[:, i]) - np.abs(c[:, 0]) - sgn_dw[:, i - 1]
                tan[(x, i)].update(0.5 * two_l)
                occ[(x, i)].update(0.25 * occ_cum[:, i - 1] / epsilon)
            for tol in tols:
                band[(x, tol)].update(band_measure(grid, w, x, tol))
    rows = []
    for x in levels:
        for t, i in zip(times, idx):
            a, b = tan[(x, i)].result(), occ[(x, i)].result()
            rows.append(SweepRow(x, float(t), a.estimate, a.std_error, b.estimate, b.std_error))
    bands = []
    for x in levels:
        for tol in tols:
            r = band[(x, tol)].result()
            bands.append(BandRow(x, float(tol), r.estimate, r.std_error))
    return LocalTimeSweep(rows, bands, n_paths, grid.n_steps, float(epsilon), process)
