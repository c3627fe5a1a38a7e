"""
Euler-Maruyama variants driven by a shared Brownian path, the
continuous-time interpolation of a coarse path at finer times, and the
deviation statistics used by the rate harness.

All arrays may carry leading path axes; a block of paths is advanced at once.
"""
import logging
import math
from typing import List, Sequence, Tuple

import numpy as np

from ..data.models import (
    BrownianPath, DeviationSample, GridPath, MomentEstimate, SchemeKind,
    SdeProblem, StoppingKind, StoppingTimeSpec, level_of,
)
from ..errors import ArgumentError
from .brownian import coarsen, generate_batch, path_blocks
from .parallel import map_blocks

logger = logging.getLogger(__name__)

MIN_P, MAX_P = 1.0, 8.0


def eta(n: int, T: float, s: float) -> float:
    """Left grid point kT/n of the interval containing s; eta(T) = T."""
    if n < 1 or T <= 0:
        raise ArgumentError("n must be positive and T positive")
    if not 0.0 <= s <= T:
        raise ArgumentError(f"s = {s} lies outside [0, {T}]")
    if s == T:
        return T
    k = math.floor(s * n / T)
    # s*n/T may round across an integer in either direction
    if (k + 1) * T / n <= s:
        k += 1
    elif k * T / n > s:
        k -= 1
    return k * T / n


def _coefficient_times(scheme: SchemeKind, start, span) -> Tuple[object, object]:
    """Time arguments (drift, diffusion) for a step of length `span` from `start`."""
    if scheme == SchemeKind.STANDARD:
        return start, start
    middle = start + 0.5 * span
    if scheme == SchemeKind.POLYGONAL:
        return middle, middle
    return middle, start


def _diffuse(sigma: np.ndarray, dw: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,...j->...i", sigma, dw)


def simulate(p: SdeProblem, scheme: SchemeKind, n_steps: int, w: BrownianPath) -> GridPath:
    """
    Advance the scheme over the n_steps increments of `w`:
    X_{k+1} = X_k + (T/n) b(tb_k, X_k) + sigma(ts_k, X_k) dW_k.
    """
    level_of(n_steps)
    if w.n_fine != n_steps:
        raise ArgumentError(
            f"Brownian path has {w.n_fine} increments, scheme needs {n_steps}; coarsen first"
        )
    if w.dim_d != p.dim_d:
        raise ArgumentError(f"Brownian dimension {w.dim_d} != problem dimension {p.dim_d}")
    if w.horizon_T != p.horizon_T:
        raise ArgumentError("Brownian horizon differs from the problem horizon")

    dt = p.horizon_T / n_steps
    times = np.arange(n_steps + 1) * dt
    batch = w.batch_shape
    states = np.empty(batch + (n_steps + 1, p.dim_d))
    x = np.broadcast_to(p.x0_array, batch + (p.dim_d,)).copy()
    states[..., 0, :] = x

    for k in range(n_steps):
        tb, ts = _coefficient_times(scheme, times[k], dt)
        drift = np.asarray(p.drift(tb, x), dtype=float)
        sigma = np.asarray(p.diffusion(ts, x), dtype=float)
        x = x + dt * drift + _diffuse(sigma, w.increments[..., k, :])
        states[..., k + 1, :] = x

    return GridPath(
        n_steps=n_steps, times=times, states=states, scheme=scheme,
        problem=p, brownian=w,
    )


def continuous_states(coarse: GridPath, fine_brownian: BrownianPath) -> np.ndarray:
    """
    Coarse path evaluated at every time of a finer nested grid using its
    continuous-time form: coefficients frozen at X_{eta(t)}, true Brownian
    increment over [eta(t), t]. Shape (..., n_fine + 1, d).
    """
    if fine_brownian.level_L < coarse.level:
        raise ArgumentError("fine Brownian path is coarser than the scheme grid")
    if fine_brownian.dim_d != coarse.problem.dim_d:
        raise ArgumentError("dimension mismatch between path and problem")

    p = coarse.problem
    ratio = fine_brownian.n_fine // coarse.n_steps
    if ratio == 1:
        return np.array(coarse.states)

    h = p.horizon_T / fine_brownian.n_fine
    n_c, d = coarse.n_steps, p.dim_d
    batch = coarse.states.shape[:-2]

    w = fine_brownian.values()
    w = np.broadcast_to(w, batch + w.shape[-2:])
    starts = np.arange(n_c) * ratio
    substep = np.arange(ratio)
    offsets = substep * h                                   # (r,)
    grid_start = coarse.times[:-1][:, None]                 # (n_c, 1)
    tb, ts = _coefficient_times(coarse.scheme, grid_start, offsets[None, :])

    x_k = np.broadcast_to(coarse.states[..., :-1, None, :], batch + (n_c, ratio, d))
    w_fine = w[..., :-1, :].reshape(batch + (n_c, ratio, d))
    dw = w_fine - w[..., starts, :][..., None, :]

    drift = np.asarray(p.drift(np.broadcast_to(tb, (n_c, ratio)), x_k), dtype=float)
    sigma = np.asarray(p.diffusion(np.broadcast_to(ts, (n_c, ratio)), x_k), dtype=float)
    inner = x_k + offsets[:, None] * drift + _diffuse(sigma, dw)

    out = np.empty(batch + (fine_brownian.n_fine + 1, d))
    out[..., :-1, :] = inner.reshape(batch + (n_c * ratio, d))
    out[..., -1, :] = coarse.states[..., -1, :]
    return out


def first_exit_index(states: np.ndarray, radius: float) -> np.ndarray:
    """First grid index with |X| >= radius; the last index when the path never exits."""
    hit = np.linalg.norm(states, axis=-1) >= radius
    last = states.shape[-2] - 1
    return np.where(hit.any(axis=-1), hit.argmax(axis=-1), last)


def _tau_indices(tau: StoppingTimeSpec, reference: GridPath) -> np.ndarray:
    batch = reference.states.shape[:-2]
    n, T = reference.n_steps, reference.problem.horizon_T
    if tau.kind == StoppingKind.HORIZON:
        return np.full(batch, n, dtype=int)
    if tau.kind == StoppingKind.DETERMINISTIC:
        index = int(round(eta(n, T, tau.value) * n / T))
        return np.full(batch, index, dtype=int)
    return first_exit_index(reference.states, tau.value)


def _check_same_path(fine: GridPath, coarse: GridPath):
    if fine.problem is not coarse.problem and fine.problem.name != coarse.problem.name:
        raise ArgumentError("fine and coarse paths solve different problems")
    if fine.n_steps % coarse.n_steps:
        raise ArgumentError(
            f"grids are not nested: {coarse.n_steps} does not divide {fine.n_steps}"
        )
    aggregated = coarsen(fine.brownian, coarse.level).increments
    if aggregated.shape != coarse.brownian.increments.shape or not np.allclose(
        aggregated, coarse.brownian.increments, rtol=1e-9, atol=1e-12
    ):
        raise ArgumentError("fine and coarse paths are not driven by the same Brownian path")


def deviation_stats(
    fine: GridPath,
    coarse: GridPath,
    p_exponent: float,
    taus: Sequence[StoppingTimeSpec],
) -> DeviationSample:
    """
    Y = X_fine - X_coarse on the fine grid: |Y_tau| per stopping time,
    max_k |Y_{t_k}|^p and |Y_T|^p.
    """
    if not MIN_P <= p_exponent <= MAX_P:
        raise ArgumentError(f"p_exponent must lie in [{MIN_P}, {MAX_P}]")
    _check_same_path(fine, coarse)

    approx = continuous_states(coarse, fine.brownian)
    deviation = np.linalg.norm(fine.states - approx, axis=-1)

    columns = []
    for tau in taus:
        index = _tau_indices(tau, fine)
        columns.append(np.take_along_axis(deviation, index[..., None], axis=-1)[..., 0])
    tau_abs = np.stack(columns, axis=-1) if columns else np.zeros(deviation.shape[:-1] + (0,))

    return DeviationSample(
        taus=tuple(taus),
        p_exponent=p_exponent,
        tau_abs=tau_abs,
        sup_p=deviation.max(axis=-1) ** p_exponent,
        terminal_p=deviation[..., -1] ** p_exponent,
    )


def _increment_block(task) -> Tuple[np.ndarray, np.ndarray]:
    """Sums of |U_t|^q and |U_t|^(2q) over a block, one entry per grid midpoint."""
    p, n, q, seed, indices = task
    level = level_of(n) + 1
    w = generate_batch(p.dim_d, level, p.horizon_T, seed, indices)
    scheme_path = simulate(p, SchemeKind.STANDARD, n, coarsen(w, level - 1))
    midpoints = continuous_states(scheme_path, w)[..., 1::2, :]
    increment = np.linalg.norm(midpoints - scheme_path.states[..., :-1, :], axis=-1) ** q
    return increment.sum(axis=0), (increment ** 2).sum(axis=0)


def increment_moment(
    p: SdeProblem,
    n: int,
    q: float,
    paths: int,
    seed: int,
    block_size: int = 1024,
    workers: int = 1,
) -> MomentEstimate:
    """
    max over grid midpoints t of E|X_t^{(n)} - X_{eta(t)}^{(n)}|^q, estimated
    on `paths` paths; off-grid values follow the continuous-time scheme.
    """
    if q <= 0:
        raise ArgumentError("q must be positive")
    if paths < 2:
        raise ArgumentError("paths must be at least 2")
    level_of(n)

    tasks = [(p, n, q, seed, block) for block in path_blocks(paths, block_size)]
    results = map_blocks(_increment_block, tasks, workers)
    total = np.sum(np.stack([r[0] for r in results]), axis=0)
    total_sq = np.sum(np.stack([r[1] for r in results]), axis=0)

    mean = total / paths
    variance = np.maximum(total_sq / paths - mean ** 2, 0.0) * paths / (paths - 1)
    best = int(np.argmax(mean))
    midpoint_time = (best + 0.5) * p.horizon_T / n
    logger.info("increment_moment(%s, n=%d, q=%g): %.6g at t=%.4g", p.name, n, q, mean[best], midpoint_time)
    return MomentEstimate(
        value=float(mean[best]),
        std_error=float(np.sqrt(variance[best] / paths)),
        paths=paths,
        time=midpoint_time,
    )
