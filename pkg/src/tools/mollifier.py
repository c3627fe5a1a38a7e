"""
Gaussian mollification of bounded base functions and numerical evidence
for the approximation-class conditions:

  (i)   integral over |x| <= L of |g_N - g| tends to 0
  (ii)  sup over N of |g_N| stays bounded
  (iii) weighted gradient integrals grow at most like K (1 + sqrt(u))

plus Monte Carlo estimates of time-integrated gaps along scheme paths.
"""
import logging
import math
import warnings
from dataclasses import dataclass
from itertools import product as cartesian
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate
from scipy.interpolate import interp1d

from ..data.bases import BaseFunction, CallableBase, linear, product
from ..data.models import (
    A3Sample, ConditionReport, ConvergenceReport, SchemeKind, SdeProblem, level_of,
)
from ..errors import ArgumentError, UnsupportedDimensionError
from .brownian import coarsen, generate_batch, path_blocks
from .em_scheme import continuous_states, simulate
from .parallel import map_blocks

logger = logging.getLogger(__name__)

TRUNCATION = 8.0          # standard deviations of the mollifier kept
EPSABS = 1e-8
FD_STEP = 1e-5
MAX_DIM = 2
QUAD_LIMIT = 200
DEFAULT_SHIFTS = (0.0, 1.0, -1.0, 5.0, -5.0)
DEFAULT_U = (1e-2, 1e-1, 1.0, 10.0, 100.0)
HERMITE_CUTOFF = 6.0      # e^{-36} is below every tolerance used here
KERNEL_EDGES = np.array([-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0])
KERNEL_NODES = 6
OUTER_NODES = 8
FEATURE_OFFSETS = (-16.0, -8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0, 16.0)  # in units of 1/N
CHUNK_SIZE = 1 << 21      # base evaluations per batch
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _quad(func, low, high, points=(), epsabs=EPSABS) -> float:
    inner = sorted(pt for pt in points if low < pt < high)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, _ = integrate.quad(
            func, low, high, points=inner or None, epsabs=epsabs, epsrel=1e-10, limit=QUAD_LIMIT,
        )
    return value


@dataclass(frozen=True)
class MollifierSeq:
    """g_N(t, x) = integral of g(t, y) rho_N(x - y) dy, rho_N the N(0, I/N^2) density."""
    base: BaseFunction
    dim_d: int
    g_inf: float

    @property
    def name(self) -> str:
        return self.base.name

    def _as_points(self, x) -> Tuple[np.ndarray, bool]:
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0 or (self.dim_d == 1 and x.shape == (1,))
        if self.dim_d == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        if x.shape[-1] != self.dim_d:
            raise ArgumentError(f"points must have {self.dim_d} coordinates, got shape {x.shape}")
        return x, scalar

    def _convolve_line(self, N: int, t: float, xs: np.ndarray) -> np.ndarray:
        """d = 1: adaptive vector quadrature over y, all points at once."""
        width = TRUNCATION / N
        low, high = float(xs.min()) - width, float(xs.max()) + width
        # seed the subdivision at two kernel widths so no kernel falls between nodes
        seeds = np.arange(low, high, 2.0 / N)[1:].tolist()
        seeds += [b for b in self.base.coordinate_breakpoints(0) if low < b < high]

        def integrand(y):
            weight = float(self.base(t, np.array([y])))
            if weight == 0.0:
                return np.zeros_like(xs)
            z = N * (xs - y)
            return weight * N * _INV_SQRT_2PI * np.exp(-0.5 * z * z)

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            value, _ = integrate.quad_vec(
                integrand, low, high, epsabs=EPSABS, epsrel=1e-10, norm="max",
                limit=max(10_000, 4 * len(seeds)),
                points=sorted(set(seeds)) or None,
            )
        return np.asarray(value)

    def _convolve_plane_point(self, N: int, t: float, point: np.ndarray) -> float:
        """d = 2: nested adaptive quadrature over z in [-8, 8]^2."""
        def integrand(z1, z2):
            y = point - np.array([z1, z2]) / N
            density = _INV_SQRT_2PI ** 2 * math.exp(-0.5 * (z1 * z1 + z2 * z2))
            return float(self.base(t, y)) * density

        opts = []
        for axis in range(2):
            pts = [N * (point[axis] - b) for b in self.base.coordinate_breakpoints(axis)]
            pts = [z for z in pts if -TRUNCATION < z < TRUNCATION]
            axis_opts = {"epsabs": EPSABS, "epsrel": 1e-10, "limit": QUAD_LIMIT}
            if pts:
                # nquad iterates over "points"; None is not accepted
                axis_opts["points"] = pts
            opts.append(axis_opts)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            value, _ = integrate.nquad(
                integrand, [[-TRUNCATION, TRUNCATION], [-TRUNCATION, TRUNCATION]], opts=opts,
            )
        return value

    def evaluator(self, N: int, t, x):
        """g_N(t, x); x is a scalar/array of scalars for d = 1, or points [..., d]."""
        if N < 1:
            raise ArgumentError("N must be a positive integer")
        points, scalar = self._as_points(x)
        flat = points.reshape(-1, self.dim_d)
        if flat.shape[0] == 0:
            return np.zeros(points.shape[:-1])
        if self.dim_d == 1:
            values = self._convolve_line(int(N), t, flat[:, 0])
        else:
            values = np.array([self._convolve_plane_point(int(N), t, row) for row in flat])
        values = values.reshape(points.shape[:-1])
        return float(values.reshape(-1)[0]) if scalar else values

    def gradient(self, N: int, t, x) -> np.ndarray:
        """Central finite differences with step 1e-5; shape [..., d]."""
        points, _ = self._as_points(x)
        columns = []
        for axis in range(self.dim_d):
            shift = np.zeros(self.dim_d)
            shift[axis] = FD_STEP
            both = np.stack([points + shift, points - shift])
            values = np.asarray(self.evaluator(N, t, both))
            columns.append((values[0] - values[1]) / (2.0 * FD_STEP))
        return np.stack(columns, axis=-1)

    def tabulate(self, N: int, t, low: float, high: float, spacing: Optional[float] = None) -> interp1d:
        """Cubic interpolant of g_N(t, .) on [low, high] (d = 1)."""
        if self.dim_d != 1:
            raise UnsupportedDimensionError("tabulation is one-dimensional")
        grid = _table_grid(N, low, high, spacing)
        return interp1d(grid, self.evaluator(N, t, grid), kind="cubic", assume_sorted=True)


def _table_grid(N: int, low: float, high: float, spacing: Optional[float] = None) -> np.ndarray:
    step = spacing or 1.0 / (16.0 * N)
    count = max(int(math.ceil((high - low) / step)) + 1, 4)
    return np.linspace(low, high, count)


def mollify(base: Union[BaseFunction, Callable], dim_d: int, g_inf: float) -> MollifierSeq:
    """Wrap a bounded base function; only d <= 2 is supported."""
    if dim_d < 1:
        raise ArgumentError("dim_d must be positive")
    if dim_d > MAX_DIM:
        raise UnsupportedDimensionError(
            f"mollification needs d <= {MAX_DIM} (quadrature cost), got d = {dim_d}"
        )
    if g_inf < 0:
        raise ArgumentError("g_inf must be nonnegative")
    if not isinstance(base, BaseFunction):
        name = getattr(base, "__name__", "custom")
        base = CallableBase(name, dim_d, float(g_inf), func=base)
    if base.dim_d != dim_d:
        raise ArgumentError(f"base has dimension {base.dim_d}, expected {dim_d}")

    axis = np.linspace(-10.0, 10.0, 2001 if dim_d == 1 else 101)
    probe = np.stack(np.meshgrid(*([axis] * dim_d), indexing="ij"), axis=-1).reshape(-1, dim_d)
    observed = float(np.max(np.abs(base(0.0, probe))))
    if observed > g_inf + 1e-12:
        raise ArgumentError(f"base reaches {observed:.6g}, above the bound g_inf = {g_inf}")
    return MollifierSeq(base, dim_d, float(g_inf))


def _parse_op(op) -> Tuple[str, float, float]:
    if isinstance(op, str):
        key = op.strip().lower()
        if key == "product":
            return "product", 1.0, 1.0
        if key.startswith("linear(") and key.endswith(")"):
            alpha, beta = (float(v) for v in key[len("linear("):-1].split(","))
            return "linear", alpha, beta
    elif isinstance(op, (tuple, list)) and len(op) == 3 and op[0] == "linear":
        return "linear", float(op[1]), float(op[2])
    raise ArgumentError(f"op must be 'product' or linear(alpha, beta), got {op!r}")


def combine(s1: MollifierSeq, s2: MollifierSeq, op="product") -> MollifierSeq:
    """Mollified product or linear combination of two bases."""
    if s1.dim_d != s2.dim_d:
        raise ArgumentError(f"dimension mismatch: {s1.dim_d} != {s2.dim_d}")
    kind, alpha, beta = _parse_op(op)
    if kind == "product":
        return MollifierSeq(product(s1.base, s2.base), s1.dim_d, s1.g_inf * s2.g_inf)
    return MollifierSeq(
        linear(s1.base, s2.base, alpha, beta), s1.dim_d,
        abs(alpha) * s1.g_inf + abs(beta) * s2.g_inf,
    )


def _ratios(values: Sequence[float]) -> List[float]:
    return [a / b if b > 0 else math.nan for a, b in zip(values[:-1], values[1:])]


def _l1_gap(seq: MollifierSeq, N: int, t: float, L: float, nodes: int) -> float:
    base = seq.base
    if seq.dim_d == 1:
        return _quad(
            lambda x: abs(seq.evaluator(N, t, x) - float(base(t, np.array([x])))),
            -L, L, points=base.coordinate_breakpoints(0), epsabs=EPSABS / 10,
        )
    # disc in polar coordinates, tensor Gauss-Legendre
    r_nodes, r_weights = leggauss(nodes)
    a_nodes, a_weights = leggauss(2 * nodes)
    radius = 0.5 * L * (r_nodes + 1.0)
    angle = math.pi * (a_nodes + 1.0)
    rr, aa = np.meshgrid(radius, angle, indexing="ij")
    points = np.stack([rr * np.cos(aa), rr * np.sin(aa)], axis=-1)
    gap = np.abs(seq.evaluator(N, t, points) - base(t, points))
    weights = np.outer(r_weights * 0.5 * L, a_weights * math.pi)
    return float(np.sum(weights * gap * rr))


def _sup_grid(seq: MollifierSeq, L: float) -> np.ndarray:
    axis = np.linspace(-L - 2.0, L + 2.0, 401 if seq.dim_d == 1 else 41)
    return np.stack(np.meshgrid(*([axis] * seq.dim_d), indexing="ij"), axis=-1).reshape(-1, seq.dim_d)


def _composite_rule(edges: np.ndarray, nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre on every panel between consecutive sorted edges [..., E] -> [..., (E-1) nodes]."""
    x, w = leggauss(nodes)
    left, right = edges[..., :-1, None], edges[..., 1:, None]
    half = 0.5 * (right - left)
    shape = edges.shape[:-1] + (-1,)
    return (0.5 * (left + right) + half * x).reshape(shape), (half * w).reshape(shape)


def _kernel_rule(seq: MollifierSeq, N: int, coords: np.ndarray, axis: int) -> Tuple[np.ndarray, np.ndarray]:
    """Per point, nodes z in [-8, 8] split where x - z/N crosses a breakpoint of the base."""
    kinks = [N * (coords - b) for b in seq.base.coordinate_breakpoints(axis)]
    fixed = np.broadcast_to(KERNEL_EDGES, coords.shape + KERNEL_EDGES.shape)
    edges = np.concatenate([fixed] + [np.clip(k, -TRUNCATION, TRUNCATION)[:, None] for k in kinks], axis=-1)
    return _composite_rule(np.sort(edges, axis=-1), KERNEL_NODES)


def _plane_gradient(seq: MollifierSeq, N: int, t: float, points: np.ndarray) -> np.ndarray:
    """
    d = 2: grad g_N(x) = -N integral g(x - z/N) z phi(z) dz, the kernel
    differentiated in closed form; points [m, 2] -> [m, 2].
    """
    (z1, w1), (z2, w2) = (_kernel_rule(seq, N, points[:, axis], axis) for axis in range(2))
    y1 = points[:, 0, None] - z1 / N
    y2 = points[:, 1, None] - z2 / N
    grid = np.stack(np.broadcast_arrays(y1[:, :, None], y2[:, None, :]), axis=-1)
    values = seq.base(t, grid)
    k1 = w1 * _INV_SQRT_2PI * np.exp(-0.5 * z1 * z1)
    k2 = w2 * _INV_SQRT_2PI * np.exp(-0.5 * z2 * z2)
    d1 = np.einsum("mk,mkl,ml->m", k1 * z1, values, k2)
    d2 = np.einsum("mk,mkl,ml->m", k1, values, k2 * z2)
    return -N * np.stack([d1, d2], axis=-1)


def _weight_axis(seq: MollifierSeq, N: int, shift: float, root: float, axis: int) -> Tuple[np.ndarray, np.ndarray]:
    """Outer nodes over |x| <= 6 sqrt(u), refined on the 1/N scale around shifted breakpoints."""
    reach = HERMITE_CUTOFF * root
    edges = [np.linspace(-reach, reach, 13)]
    for b in seq.base.coordinate_breakpoints(axis):
        edges.append((b - shift) + np.asarray(FEATURE_OFFSETS) / N)
    edges = np.unique(np.clip(np.concatenate(edges), -reach, reach))
    return _composite_rule(edges, OUTER_NODES)


def weighted_gradient_integral(seq: MollifierSeq, N: int, t: float, shift, u: float) -> float:
    """Sum_i integral |d_i g_N(x + a)| e^{-|x|^2/u} u^{-(d-1)/2} dx."""
    shift = np.atleast_1d(np.asarray(shift, dtype=float))
    if shift.shape != (seq.dim_d,):
        raise ArgumentError(f"shift must have {seq.dim_d} coordinates")
    if u <= 0:
        raise ArgumentError("u must be positive")
    root = math.sqrt(u)
    if seq.dim_d == 1:
        # x = sqrt(u) s
        kinks = [(b - shift[0]) / root for b in seq.base.coordinate_breakpoints(0)]
        return root * _quad(
            lambda s: abs(float(seq.gradient(N, t, root * s + shift[0])[0])) * math.exp(-s * s),
            -HERMITE_CUTOFF, HERMITE_CUTOFF, points=kinks,
        )

    (x1, w1), (x2, w2) = (_weight_axis(seq, N, shift[axis], root, axis) for axis in range(2))
    weights = (np.outer(w1 * np.exp(-x1 * x1 / u), w2 * np.exp(-x2 * x2 / u)) / root).ravel()
    points = np.stack(np.meshgrid(x1, x2, indexing="ij"), axis=-1).reshape(-1, 2) + shift
    chunk = max(1, CHUNK_SIZE // (KERNEL_NODES * (len(KERNEL_EDGES) + 2)) ** 2)
    total = 0.0
    for start in range(0, len(points), chunk):
        grad = _plane_gradient(seq, N, t, points[start:start + chunk])
        total += float(np.abs(grad).sum(axis=-1) @ weights[start:start + chunk])
    return total


def check_A_conditions(
    seq: MollifierSeq,
    L: float,
    N_list: Sequence[int],
    a_list: Sequence[float] = DEFAULT_SHIFTS,
    u_list: Sequence[float] = DEFAULT_U,
    t: float = 0.0,
    nodes: int = 16,
) -> ConditionReport:
    """
    Report-only evidence for the three class conditions. Shifts are taken
    coordinate-wise from a_list, so d = 2 samples len(a_list)^2 shifts;
    `nodes` is the Gauss-Legendre order of the (i) disc rule in d = 2.
    """
    N_list = [int(N) for N in N_list]
    if not N_list or not a_list or not u_list:
        raise ArgumentError("N_list, a_list and u_list must be nonempty")
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ArgumentError("N_list must be increasing")
    if L <= 0:
        raise ArgumentError("L must be positive")

    integrals = [_l1_gap(seq, N, t, L, nodes) for N in N_list]
    monotone = all(b <= a + 1e-9 for a, b in zip(integrals, integrals[1:]))

    grid = _sup_grid(seq, L)
    sup = max(float(np.max(np.abs(seq.evaluator(N, t, grid)))) for N in N_list)

    samples = []
    for shift in cartesian(*([tuple(float(a) for a in a_list)] * seq.dim_d)):
        for u in u_list:
            if u <= 0:
                raise ArgumentError("u values must be positive")
            for N in N_list:
                value = weighted_gradient_integral(seq, N, t, shift, float(u))
                samples.append(A3Sample(N, shift, float(u), value, value / (1.0 + math.sqrt(u))))

    report = ConditionReport(
        base=seq.name, L=float(L), N_list=N_list,
        a1_integrals=integrals, a1_decay_ratios=_ratios(integrals), a1_monotone=monotone,
        a2_sup=sup, a2_bound=seq.g_inf, a2_ok=sup <= seq.g_inf + EPSABS,
        a3_samples=samples, a3_K=max(s.ratio for s in samples),
    )
    logger.info(
        "class conditions for %s: (i) %s, (ii) sup %.4g, (iii) K %.4g",
        seq.name, ["%.3g" % v for v in integrals], sup, report.a3_K,
    )
    return report


def step_convergence_oracle(N: int, kappa: float, T: float) -> float:
    """
    Exact integral over [kappa, T] of E|Phi(-N W_t) - 1{W_t <= 0}|
    = integral of arctan(1 / (N sqrt t)) / pi dt.
    """
    if not 0 < kappa <= T:
        raise ArgumentError("kappa must lie in (0, T]")
    return _quad(lambda t: math.atan(1.0 / (N * math.sqrt(t))) / math.pi, kappa, T, epsabs=1e-12)


def _substep_weights(n: int, T: float, kappa: float) -> Tuple[np.ndarray, np.ndarray]:
    """Midpoints of the 4n substeps and the length of each substep inside [kappa, T]."""
    h = T / (4 * n)
    starts = np.arange(4 * n) * h
    overlap = np.clip(starts + h, kappa, T) - np.clip(starts, kappa, T)
    return starts + 0.5 * h, overlap


@dataclass(frozen=True)
class _Tables:
    """Per-N values of g_N on a shared grid; Ns == None stands for the base itself."""
    grid: np.ndarray
    values: Dict[int, np.ndarray]


def _evaluate(seq: MollifierSeq, N: Optional[int], times: np.ndarray, points: np.ndarray,
              tables: Optional[_Tables]) -> np.ndarray:
    """g_N(times, points) for points [paths, m, d] aligned with times [m]."""
    if N is None:
        return np.asarray(seq.base(times[None, :], points), dtype=float)
    if tables is not None:
        x = points[..., 0]
        inside = (x >= tables.grid[0]) & (x <= tables.grid[-1])
        out = np.empty(x.shape)
        spline = interp1d(tables.grid, tables.values[N], kind="cubic", assume_sorted=True)
        out[inside] = spline(x[inside])
        if not inside.all():
            out[~inside] = seq.evaluator(N, 0.0, x[~inside])
        return out
    out = np.empty(points.shape[:-1])
    for j, t in enumerate(times):
        out[:, j] = seq.evaluator(N, float(t), points[:, j, :])
    return out


def _gap_block(task) -> Tuple[np.ndarray, np.ndarray]:
    """Per-block sums (and sums of squares) of the time-integrated gaps, one column per N."""
    seq, p, n, kappa, columns, mode, seed, indices, tables = task
    level = level_of(n)
    w = generate_batch(p.dim_d, level + 3, p.horizon_T, seed, indices)
    coarse = simulate(p, SchemeKind.STANDARD, n, coarsen(w, level))
    mids, weights = _substep_weights(n, p.horizon_T, kappa)
    live = weights > 0
    mids, weights = mids[live], weights[live]
    current = continuous_states(coarse, w)[..., 1::2, :][:, live, :]
    if mode == "jump":
        frozen = np.repeat(coarse.states[..., :-1, :], 4, axis=-2)[:, live, :]

    per_path = np.empty((len(indices), len(columns)))
    for c, N in enumerate(columns):
        left = _evaluate(seq, N, mids, current, tables)
        if mode == "jump":
            right = _evaluate(seq, N, np.floor(mids * n / p.horizon_T) * p.horizon_T / n, frozen, tables)
        else:
            right = _evaluate(seq, None, mids, current, None)
        per_path[:, c] = np.abs(left - right) @ weights
    return per_path.sum(axis=0), (per_path ** 2).sum(axis=0)


def _reach(p: SdeProblem) -> Tuple[float, float]:
    """Interval that holds the paths of a 1-d problem with overwhelming probability."""
    probe = p.x0_array[0] + np.linspace(-5.0, 5.0, 41)[:, None]
    spread = float(np.sqrt(np.max(p.covariance(0.0, probe)[..., 0, 0])))
    radius = p.meta.drift_bound * p.horizon_T + TRUNCATION * spread * math.sqrt(p.horizon_T) + 1.0
    return p.x0_array[0] - radius, p.x0_array[0] + radius


def _monte_carlo(seq, p, n, kappa, columns, mode, paths, seed, block_size, workers):
    if seq.dim_d != p.dim_d:
        raise ArgumentError(f"sequence dimension {seq.dim_d} != problem dimension {p.dim_d}")
    if not 0 < kappa <= p.horizon_T:
        raise ArgumentError("kappa must lie in (0, T]")
    if paths < 2:
        raise ArgumentError("paths must be at least 2")
    level_of(n)

    tables = None
    if seq.dim_d == 1 and seq.base.time_homogeneous:
        low, high = _reach(p)
        grid = _table_grid(max(N for N in columns if N is not None), low, high)
        tables = _Tables(grid, {N: seq.evaluator(N, 0.0, grid) for N in columns if N is not None})

    tasks = [
        (seq, p, n, kappa, columns, mode, seed, block, tables)
        for block in path_blocks(paths, block_size)
    ]
    results = map_blocks(_gap_block, tasks, workers)
    total = np.sum(np.stack([r[0] for r in results]), axis=0)
    total_sq = np.sum(np.stack([r[1] for r in results]), axis=0)
    mean = total / paths
    variance = np.maximum(total_sq / paths - mean ** 2, 0.0) * paths / (paths - 1)
    return mean, np.sqrt(variance / paths)


def mollifier_convergence(
    seq: MollifierSeq,
    p: SdeProblem,
    n: int,
    kappa: float,
    N_list: Sequence[int],
    paths: int,
    seed: int,
    block_size: int = 1024,
    workers: int = 1,
) -> ConvergenceReport:
    """
    For each N: integral over [kappa, T] of E|g_N(t, Y_t) - g(t, Y_t)| dt,
    Y the continuous-time scheme with n steps, time integral by the midpoint
    rule on 4n substeps.
    """
    N_list = [int(N) for N in N_list]
    if not N_list:
        raise ArgumentError("N_list must be nonempty")
    mean, error = _monte_carlo(seq, p, n, kappa, N_list, "mollifier", paths, seed, block_size, workers)

    oracle = None
    if (isinstance(seq.base, BaseFunction) and seq.base.name == "step" and p.name == "brownian"
            and not np.any(p.x0_array)):
        oracle = [step_convergence_oracle(N, kappa, p.horizon_T) for N in N_list]
    logger.info("mollifier_convergence(%s on %s, n=%d): %s", seq.name, p.name, n,
                ["%.4g" % v for v in mean])
    return ConvergenceReport(
        base=seq.name, problem=p.name, n_steps=n, kappa=float(kappa), paths=paths,
        N_list=N_list, estimates=mean.tolist(), std_errors=error.tolist(), oracle=oracle,
    )


def mollified_jump_limit(
    seq: MollifierSeq,
    p: SdeProblem,
    n: int,
    N_list: Sequence[int],
    paths: int,
    seed: int,
    block_size: int = 1024,
    workers: int = 1,
) -> ConvergenceReport:
    """
    For each N: integral over [T/n, T] of E|g_N(s, X_s) - g_N(s, X_eta(s))| ds,
    and the same functional for g itself in `limit`; the estimates should
    approach the limit as N grows.
    """
    N_list = [int(N) for N in N_list]
    if not N_list:
        raise ArgumentError("N_list must be nonempty")
    kappa = p.horizon_T / n
    mean, error = _monte_carlo(
        seq, p, n, kappa, N_list + [None], "jump", paths, seed, block_size, workers,
    )
    return ConvergenceReport(
        base=seq.name, problem=p.name, n_steps=n, kappa=kappa, paths=paths, N_list=N_list,
        estimates=mean[:-1].tolist(), std_errors=error[:-1].tolist(),
        limit=float(mean[-1]), limit_std_error=float(error[-1]),
    )
