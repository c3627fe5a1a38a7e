"""
Empirical checks of the intermediate estimates behind the strong rates:
two-sided Gaussian envelopes for the scheme's marginal density, the
discontinuity integral with its square-root decay, and Komatsu's
lower bound on the Gaussian tail.
"""
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from ..data.models import (
    DensityCheckReport, DiscontinuityProfile, EnvelopeCalibration, Estimate,
    PropertyReport, SchemeKind, SdeProblem, level_of,
)
from ..errors import ArgumentError
from .brownian import coarsen, generate_batch, path_blocks
from .em_scheme import continuous_states, simulate
from .parallel import map_blocks

logger = logging.getLogger(__name__)

MIN_DENSITY_PATHS = 10_000
MIN_EXPECTED_COUNT = 50
CI_Z = 3.0
SAFETY_MARGIN = 1.25
DEFAULT_C_GRID = tuple(np.round(np.linspace(0.2, 1.0, 17), 6))
BINS_PER_AXIS = {1: 40, 2: 16}
SUBSTEPS = 4


def gaussian_envelope(c: float, t: float, x0, x) -> np.ndarray:
    """p_c(t, x0, x) = (c / 2 pi t)^{d/2} exp(-c |x - x0|^2 / 2t)."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    squared = np.sum((x - np.asarray(x0, dtype=float)) ** 2, axis=-1)
    return (c / (2.0 * math.pi * t)) ** (d / 2.0) * np.exp(-c * squared / (2.0 * t))


# --- marginal sampling -------------------------------------------------------

def _marginal_block(task) -> np.ndarray:
    p, n, index, seed, indices = task
    w = generate_batch(p.dim_d, level_of(n), p.horizon_T, seed, indices)
    return simulate(p, SchemeKind.STANDARD, n, w).states[:, index, :]


def _sample_marginal(p: SdeProblem, n: int, t_grid_index: int, paths: int, seed: int,
                     block_size: int, workers: int) -> np.ndarray:
    level_of(n)
    if t_grid_index == 0:
        raise ArgumentError("t_grid_index = 0 is the initial point mass; use 1..n")
    if not 1 <= t_grid_index <= n:
        raise ArgumentError(f"t_grid_index must lie in [1, {n}]")
    tasks = [(p, n, t_grid_index, seed, block) for block in path_blocks(paths, block_size)]
    return np.concatenate(map_blocks(_marginal_block, tasks, workers), axis=0)


def _edges(p: SdeProblem, t: float) -> List[np.ndarray]:
    """Per coordinate: -inf, a uniform grid around x0, +inf."""
    spread = 5.0 * math.sqrt(t * p.meta.ellipticity_lambda0) + p.meta.drift_bound * t
    count = BINS_PER_AXIS.get(p.dim_d, 8)
    return [
        np.concatenate([[-np.inf], np.linspace(x0 - spread, x0 + spread, count + 1), [np.inf]])
        for x0 in p.x0_array
    ]


def _histogram(samples: np.ndarray, edges: List[np.ndarray]) -> np.ndarray:
    """Counts on the product grid, shape (bins_1, ..., bins_d)."""
    shape = tuple(len(e) - 1 for e in edges)
    index = tuple(
        np.searchsorted(e[1:-1], samples[:, axis], side="right")
        for axis, e in enumerate(edges)
    )
    flat = np.ravel_multi_index(index, shape)
    return np.bincount(flat, minlength=int(np.prod(shape))).reshape(shape)


def _bin_mass(edges: List[np.ndarray], x0: np.ndarray, variance: float) -> np.ndarray:
    """N(x0, variance I) probability of every bin of the product grid."""
    scale = math.sqrt(variance)
    factors = [np.diff(special.ndtr((e - centre) / scale)) for e, centre in zip(edges, x0)]
    mass = factors[0]
    for factor in factors[1:]:
        mass = np.multiply.outer(mass, factor)
    return mass


def simultaneous_z(ci_z: float, bins: int) -> float:
    """
    Bonferroni widening of a per-bin two-sided ci_z band so that it holds
    for all `bins` bins at once with the same total level.
    """
    if bins < 1:
        raise ArgumentError("bins must be positive")
    return float(-special.ndtri(special.ndtr(-ci_z) / bins))


class _BinStatistics:
    """Empirical bin probabilities with simultaneous binomial confidence bands."""

    def __init__(self, counts: np.ndarray, paths: int, ci_z: float):
        self.counts = counts
        self.prob = counts / paths
        self.z = simultaneous_z(ci_z, counts.size)
        half = self.z * np.sqrt(self.prob * (1.0 - self.prob) / paths)
        self.low = self.prob - half
        self.high = self.prob + half
        self.paths = paths

    def required_upper(self, edges, x0, t, c) -> float:
        """Smallest C with low <= C mass_c in every bin."""
        mass = _bin_mass(edges, x0, t / c)
        need = self.low > 0
        if not need.any():
            return 0.0
        with np.errstate(divide="ignore"):
            ratio = np.where(mass[need] > 0, self.low[need] / mass[need], np.inf)
        return float(ratio.max())

    def required_lower(self, edges, x0, t, c) -> Tuple[float, int]:
        """Smallest C with mass_{1/c} / C <= high on bins expected to hold enough paths."""
        mass = _bin_mass(edges, x0, t * c)
        eligible = mass * self.paths >= MIN_EXPECTED_COUNT
        if not eligible.any():
            return 0.0, 0
        with np.errstate(divide="ignore"):
            ratio = np.where(self.high[eligible] > 0, mass[eligible] / self.high[eligible], np.inf)
        return float(ratio.max()), int(np.count_nonzero(eligible))


def _best(stats: _BinStatistics, edges, x0, t, c_grid, upper: bool) -> Tuple[float, float]:
    best_C, best_c = math.inf, math.nan
    for c in c_grid:
        C = stats.required_upper(edges, x0, t, c) if upper else stats.required_lower(edges, x0, t, c)[0]
        if C < best_C:
            best_C, best_c = C, float(c)
    return best_C, best_c


def density_check(
    p: SdeProblem,
    n: int,
    t_grid_index: int,
    paths: int,
    seed: int,
    C: float,
    c: float,
    ci_z: float = CI_Z,
    c_grid: Sequence[float] = DEFAULT_C_GRID,
    block_size: int = 1024,
    workers: int = 1,
) -> DensityCheckReport:
    """
    Histogram of X_t with t = t_grid_index T / n against the envelopes
    C p_c(t, x0, .) from above and C^-1 p_{1/c}(t, x0, .) from below.
    A bin is flagged only when its binomial band misses the envelope; the
    per-bin ci_z band is widened to hold for all bins simultaneously, so an
    exact envelope is flagged with probability about 2 Phi(-ci_z) per run.
    Lower-bound bins need an expected count of 50.
    """
    if paths < MIN_DENSITY_PATHS:
        raise ArgumentError(f"density checks need at least {MIN_DENSITY_PATHS} paths")
    if C <= 0 or c <= 0:
        raise ArgumentError("C and c must be positive")

    samples = _sample_marginal(p, n, t_grid_index, paths, seed, block_size, workers)
    t = t_grid_index * p.horizon_T / n
    edges = _edges(p, t)
    counts = _histogram(samples, edges)
    stats = _BinStatistics(counts, paths, ci_z)
    x0 = p.x0_array

    upper_mass = C * _bin_mass(edges, x0, t / c)
    upper_violations = int(np.count_nonzero(stats.low > upper_mass + 1e-15))
    lower_mass = _bin_mass(edges, x0, t * c) / C
    eligible = lower_mass * paths >= MIN_EXPECTED_COUNT
    lower_violations = int(np.count_nonzero(eligible & (stats.high < lower_mass)))

    fitted_C_upper, fitted_c_upper = _best(stats, edges, x0, t, c_grid, upper=True)
    fitted_C_lower, fitted_c_lower = _best(stats, edges, x0, t, c_grid, upper=False)
    report = DensityCheckReport(
        problem=p.name, n_steps=n, t=t, paths=paths, C=float(C), c=float(c),
        edges=[e.tolist() for e in edges], counts=counts.ravel().tolist(),
        upper_violations=upper_violations, lower_violations=lower_violations,
        lower_eligible_bins=int(np.count_nonzero(eligible)),
        required_C_upper=stats.required_upper(edges, x0, t, c),
        required_C_lower=stats.required_lower(edges, x0, t, c)[0],
        fitted_C_upper=fitted_C_upper, fitted_c_upper=fitted_c_upper,
        fitted_C_lower=fitted_C_lower, fitted_c_lower=fitted_c_lower,
        band_z=stats.z,
    )
    logger.info(
        "density_check(%s, n=%d, t=%.4g): %d upper / %d lower violations",
        p.name, n, t, upper_violations, lower_violations,
    )
    return report


def calibrate_envelope(
    p: SdeProblem,
    n: int,
    t_grid_index: int,
    paths: int = 100_000,
    seed: int = 0,
    c_grid: Sequence[float] = DEFAULT_C_GRID,
    margin: float = SAFETY_MARGIN,
    ci_z: float = CI_Z,
    block_size: int = 1024,
    workers: int = 1,
) -> EnvelopeCalibration:
    """Grid search over c for the smallest C serving both envelopes, then scaled by `margin`."""
    if margin < 1:
        raise ArgumentError("margin must be at least 1")
    if not len(c_grid):
        raise ArgumentError("c_grid must not be empty")
    samples = _sample_marginal(p, n, t_grid_index, paths, seed, block_size, workers)
    t = t_grid_index * p.horizon_T / n
    edges = _edges(p, t)
    stats = _BinStatistics(_histogram(samples, edges), paths, ci_z)

    raw_C, best_c = math.inf, math.nan
    for c in c_grid:
        needed = max(
            1.0,
            stats.required_upper(edges, p.x0_array, t, c),
            stats.required_lower(edges, p.x0_array, t, c)[0],
        )
        if needed < raw_C:
            raw_C, best_c = needed, float(c)
    logger.info("calibrated envelope for %s: C=%.4g (raw %.4g), c=%.4g", p.name, raw_C * margin, raw_C, best_c)
    return EnvelopeCalibration(C=raw_C * margin, c=best_c, raw_C=raw_C, margin=float(margin), paths=paths)


# --- discontinuity integral --------------------------------------------------

def _discontinuity_block(task) -> Tuple[float, float]:
    p, n, q, seed, indices = task
    level = level_of(n)
    w = generate_batch(p.dim_d, level + 3, p.horizon_T, seed, indices)
    coarse = simulate(p, SchemeKind.STANDARD, n, coarsen(w, level))
    # odd indices of the 8n grid are the midpoints of the 4n substeps
    current = continuous_states(coarse, w)[..., 1::2, :]
    frozen = np.repeat(coarse.states[..., :-1, :], SUBSTEPS, axis=-2)
    times = (np.arange(SUBSTEPS * n) + 0.5) * p.horizon_T / (SUBSTEPS * n)
    gap = np.asarray(p.drift(times, current), dtype=float) - np.asarray(p.drift(times, frozen), dtype=float)
    per_path = np.sum(np.abs(gap) ** q, axis=(-1, -2)) * p.horizon_T / (SUBSTEPS * n)
    return float(per_path.sum()), float((per_path ** 2).sum())


def discontinuity_integral(
    p: SdeProblem,
    n: int,
    q: float,
    paths: int,
    seed: int,
    block_size: int = 1024,
    workers: int = 1,
) -> Estimate:
    """
    Sum over coordinates of the time integral of E|b_i(s, X_s) - b_i(s, X_eta(s))|^q,
    midpoint rule with 4 points per step and X_s from the continuous-time scheme.
    """
    if q < 1:
        raise ArgumentError("q must be at least 1")
    if paths < 2:
        raise ArgumentError("paths must be at least 2")
    level_of(n)
    tasks = [(p, n, q, seed, block) for block in path_blocks(paths, block_size)]
    results = map_blocks(_discontinuity_block, tasks, workers)
    total = math.fsum(r[0] for r in results)
    total_sq = math.fsum(r[1] for r in results)
    mean = total / paths
    variance = max(total_sq / paths - mean ** 2, 0.0) * paths / (paths - 1)
    logger.info("discontinuity_integral(%s, n=%d, q=%g) = %.6g", p.name, n, q, mean)
    return Estimate(value=mean, std_error=math.sqrt(variance / paths), paths=paths)


def discontinuity_profile(
    p: SdeProblem,
    n_list: Sequence[int],
    q: float = 1.0,
    paths: int = 10_000,
    seed: int = 0,
    block_size: int = 1024,
    workers: int = 1,
) -> DiscontinuityProfile:
    """sqrt(n)-scaled discontinuity integrals; a bounded spread means decay like n^-1/2."""
    n_list = sorted(int(n) for n in n_list)
    if not n_list:
        raise ArgumentError("n_list must not be empty")
    estimates = [discontinuity_integral(p, n, q, paths, seed, block_size, workers) for n in n_list]
    scaled = [math.sqrt(n) * e.value for n, e in zip(n_list, estimates)]
    low = min(scaled)
    spread = max(scaled) / low if low > 0 else math.nan
    by_n = dict(zip(n_list, estimates))
    ratio = None
    if 64 in by_n and 256 in by_n and by_n[256].value > 0:
        ratio = by_n[64].value / by_n[256].value
    return DiscontinuityProfile(
        problem=p.name, q=float(q), paths=paths, n_list=n_list,
        estimates=estimates, scaled=scaled, spread=spread, ratio_64_256=ratio,
    )


# --- Komatsu ----------------------------------------------------------------

def komatsu_bound(x) -> np.ndarray:
    """2 e^{-x^2/2} / (sqrt(2 pi) (|x| + sqrt(x^2 + 4)))."""
    x = np.abs(np.asarray(x, dtype=float))
    return 2.0 * np.exp(-0.5 * x * x) / (math.sqrt(2.0 * math.pi) * (x + np.sqrt(x * x + 4.0)))


def komatsu_check(x_grid: Optional[Sequence[float]] = None) -> PropertyReport:
    """Phi(-|x|) >= komatsu_bound(x) on the grid; default 10^4 points in [0, 20]."""
    x = np.asarray(
        list(x_grid) if x_grid is not None else np.concatenate([[0.0], np.logspace(-4, math.log10(20.0), 9_999)]),
        dtype=float,
    )
    if x.size == 0:
        raise ArgumentError("x_grid must not be empty")
    tail = special.ndtr(-np.abs(x))
    bound = komatsu_bound(x)
    slack = tail - bound
    report = PropertyReport(name="komatsu", points=int(x.size))
    bad = slack < 0
    report.violations["komatsu"] = int(np.count_nonzero(bad))
    report.max_violation["komatsu"] = float(-slack[bad].min()) if bad.any() else 0.0
    ratio = tail / bound
    report.extras["min_slack"] = float(slack.min())
    report.extras["min_ratio"] = float(ratio.min())
    report.extras["max_ratio"] = float(ratio.max())
    return report
