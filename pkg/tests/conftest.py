import numpy as np
import pytest


def within(est, se, target, k=3.0):
    """True when ``est`` is within ``k`` standard errors of ``target``."""
    return abs(est - target) <= k * se


def mean_se(samples):
    a = np.asarray(samples, dtype=float)
    return float(a.mean()), float(a.std(ddof=1) / np.sqrt(a.size))


@pytest.fixture
def seed():
    return 20240611
