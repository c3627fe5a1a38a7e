"""
Brownian increments on the finest dyadic grid.

Each path owns a counter-based Philox stream keyed by (master_seed, path_index),
so a path is a pure function of those two numbers: regenerating it never
depends on how many other paths were drawn, in which order, or by which worker.
Normals come from the inverse CDF of one uniform each.
"""
import logging
from typing import Iterator, Sequence, Tuple

import numpy as np
from scipy import special, stats

from ..data.models import BrownianPath
from ..errors import ArgumentError, ResourceError

logger = logging.getLogger(__name__)

MAX_LEVEL = 30
# random() returns k / 2^53; the half-ulp shift keeps u above 0 and the clamp
# keeps it below 1, since (1 - 2^-53) + 2^-54 rounds to 1.0
_HALF_ULP = 2.0 ** -54
_BELOW_ONE = np.nextafter(1.0, 0.0)


def path_stream(master_seed: int, path_index: int) -> np.random.Generator:
    """Independent generator for one path."""
    if master_seed < 0 or path_index < 0:
        raise ArgumentError("master_seed and path_index must be nonnegative")
    key = np.random.SeedSequence([int(master_seed), int(path_index)])
    return np.random.Generator(np.random.Philox(key))


def standard_normals(generator: np.random.Generator, shape: Tuple[int, ...]) -> np.ndarray:
    """N(0, 1) variates by inverse CDF, one uniform per variate."""
    return special.ndtri(np.minimum(generator.random(shape) + _HALF_ULP, _BELOW_ONE))


def _check_level(level_L: int):
    if level_L < 0:
        raise ArgumentError("level_L must be nonnegative")
    if level_L > MAX_LEVEL:
        raise ResourceError(f"level_L = {level_L} exceeds the limit {MAX_LEVEL}")


def generate(
    dim_d: int,
    level_L: int,
    horizon_T: float,
    master_seed: int,
    path_index: int,
) -> BrownianPath:
    """One path of 2^L increments, each coordinate N(0, T / 2^L)."""
    _check_level(level_L)
    if dim_d < 1 or horizon_T <= 0:
        raise ArgumentError("dim_d must be positive and horizon_T positive")
    n_fine = 2 ** level_L
    scale = np.sqrt(horizon_T / n_fine)
    normals = standard_normals(path_stream(master_seed, path_index), (n_fine, dim_d))
    return BrownianPath(dim_d, level_L, horizon_T, scale * normals)


def generate_batch(
    dim_d: int,
    level_L: int,
    horizon_T: float,
    master_seed: int,
    path_indices: Sequence[int],
) -> BrownianPath:
    """Paths for several indices stacked on a leading axis (same bits as `generate`)."""
    _check_level(level_L)
    if dim_d < 1 or horizon_T <= 0:
        raise ArgumentError("dim_d must be positive and horizon_T positive")
    n_fine = 2 ** level_L
    scale = np.sqrt(horizon_T / n_fine)
    increments = np.empty((len(path_indices), n_fine, dim_d))
    for row, index in enumerate(path_indices):
        increments[row] = scale * standard_normals(path_stream(master_seed, index), (n_fine, dim_d))
    return BrownianPath(dim_d, level_L, horizon_T, increments)


def coarsen(path: BrownianPath, target_level: int) -> BrownianPath:
    """Sum consecutive blocks of 2^(L - target) increments; no resampling."""
    if target_level < 0 or target_level > path.level_L:
        raise ArgumentError(
            f"target_level {target_level} must lie in [0, {path.level_L}]"
        )
    if target_level == path.level_L:
        return path
    factor = 2 ** (path.level_L - target_level)
    blocks = path.increments.reshape(
        path.batch_shape + (2 ** target_level, factor, path.dim_d)
    )
    return BrownianPath(path.dim_d, target_level, path.horizon_T, blocks.sum(axis=-2))


def path_blocks(paths: int, block_size: int) -> Iterator[range]:
    """Partition path indices 0..paths-1 into consecutive fixed-size blocks."""
    if paths < 1 or block_size < 1:
        raise ArgumentError("paths and block_size must be positive")
    for start in range(0, paths, block_size):
        yield range(start, min(start + block_size, paths))


def ks_check(path: BrownianPath) -> Tuple[float, float]:
    """Kolmogorov-Smirnov statistic and p-value of all increments against N(0, T/2^L)."""
    sample = np.ravel(path.increments)
    result = stats.kstest(sample, "norm", args=(0.0, np.sqrt(path.dt)))
    logger.debug("KS on %d increments: D=%.4g p=%.4g", sample.size, result.statistic, result.pvalue)
    return float(result.statistic), float(result.pvalue)
