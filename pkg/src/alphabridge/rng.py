"""Counter-based random substreams.

Every simulated path draws from its own Philox4x64-10 stream.  The stream is
keyed by the master seed and positioned by writing the path index into the
third word of the 256-bit counter, so path ``i`` sees the same numbers no
matter how many other paths are generated, in what order, or in which chunk.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

GENERATOR_ID = "philox4x64-10"

_U64 = (1 << 64) - 1
_MAX_SEED = (1 << 128) - 1


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if seed < 0 or seed > _MAX_SEED:
        raise ValueError(f"seed must be in [0, 2**128), got {seed}")
    return seed


def substream(seed: int, index: int) -> np.random.Generator:
    """Generator for path ``index`` under master ``seed``."""
    seed = _check_seed(seed)
    index = int(index)
    if index < 0 or index > _U64:
        raise ValueError(f"path index must fit in 64 bits, got {index}")
    counter = np.array([0, 0, index, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=seed, counter=counter))


@dataclass(frozen=True)
class SeedRecord:
    """Enough to regenerate a path: master seed, substream index, generator."""

    seed: int
    path_index: int = 0
    generator: str = GENERATOR_ID
    antithetic: bool = False


def standard_normals(
    seed: int,
    n_paths: int,
    n_draws: int,
    *,
    start: int = 0,
    antithetic: bool = False,
) -> np.ndarray:
    """Standard normal draws, one row per path, shape ``(n_paths, n_draws)``.

    Row ``k`` belongs to path ``start + k``.  With ``antithetic`` the paths
    come in pairs ``(2j, 2j+1)`` that share substream ``j`` with opposite
    signs.
    """
    if n_paths < 0 or n_draws < 0:
        raise ValueError("n_paths and n_draws must be non-negative")
    out = np.empty((n_paths, n_draws))
    if antithetic:
        cache_idx, cache = -1, None
        for k in range(n_paths):
            i = start + k
            j, sign = divmod(i, 2)
            if j != cache_idx:
                cache = substream(seed, j).standard_normal(n_draws)
                cache_idx = j
            out[k] = cache if sign == 0 else -cache
        return out
    for k in range(n_paths):
        out[k] = substream(seed, start + k).standard_normal(n_draws)
    return out


def chunks(n_paths: int, chunk_size: int) -> Iterator[tuple[int, int]]:
    """Yield ``(start, count)`` blocks covering ``range(n_paths)``."""
    if chunk_size <= 0:
        raise ValueError("chunk_size must be positive")
    for start in range(0, n_paths, chunk_size):
        yield start, min(chunk_size, n_paths - start)


def chunk_size_for(n_points: int, budget: int = 4_000_000) -> int:
    """Paths per chunk so a chunk holds roughly ``budget`` floats."""
    return max(1, budget // max(1, n_points))
