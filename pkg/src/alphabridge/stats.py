"""Monte Carlo summaries."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np


class MCEstimate(NamedTuple):
    estimate: float
    std_error: float
    n: int


def mc_mean(samples) -> MCEstimate:
    """Sample mean with its standard error (ddof=1)."""
    x = np.asarray(samples, dtype=float).ravel()
    n = x.size
    if n == 0:
        raise ValueError("no samples")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite samples")
    se = float(x.std(ddof=1) / np.sqrt(n)) if n > 1 else float("inf")
    return MCEstimate(float(x.mean()), se, n)


class RunningMoments:
    """Streaming mean / standard error accumulator for chunked simulation."""

    def __init__(self) -> None:
        self.n = 0
        self._sum = 0.0
        self._sumsq = 0.0
        self._shift: float | None = None

    def update(self, samples) -> None:
        x = np.asarray(samples, dtype=float).ravel()
        if x.size == 0:
            return
        if not np.all(np.isfinite(x)):
            raise ValueError("non-finite samples")
        if self._shift is None:
            self._shift = float(x[0])
        d = x - self._shift
        self.n += x.size
        self._sum += float(d.sum())
        self._sumsq += float((d * d).sum())

    def result(self) -> MCEstimate:
        if self.n == 0:
            raise ValueError("no samples")
        mean_d = self._sum / self.n
        if self.n > 1:
            var = (self._sumsq - self.n * mean_d * mean_d) / (self.n - 1)
            se = float(np.sqrt(max(var, 0.0) / self.n))
        else:
            se = float("inf")
        return MCEstimate(self._shift + mean_d, se, self.n)
