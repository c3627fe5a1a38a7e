"""
Data models for SDE problems, Brownian paths, scheme trajectories and reports.
Designed so every experiment output carries enough context to be reproduced.
"""
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from ..errors import ArgumentError


class SchemeKind(Enum):
    """Euler-Maruyama variants."""
    STANDARD = "standard"    # coefficients frozen at the left grid point
    POLYGONAL = "polygonal"  # time argument runs free, state frozen
    MIXED = "mixed"          # drift time free, diffusion time frozen


class NormKind(Enum):
    """Error functionals estimated by the rate harness."""
    TERMINAL_STOPPING = "terminal_stopping"  # max over a stopping-time family of E|Y_tau|
    SUP = "sup"                              # E sup_t |Y_t|
    SUP_P = "sup_p"                          # E sup_t |Y_t|^p


class StoppingKind(Enum):
    """Families of stopping times evaluated by deviation_stats."""
    DETERMINISTIC = "deterministic"
    FIRST_EXIT = "first_exit"
    HORIZON = "horizon"


# Coefficient signatures: drift(t, x[..., d]) -> [..., d]; diffusion(t, x[..., d]) -> [..., d, d]
Coefficient = Callable[[object, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class CoeffMeta:
    """Regularity constants of the coefficients."""
    one_sided_lipschitz_K: float
    ellipticity_lambda0: float
    holder_alpha: float
    holder_beta_time: float
    drift_bound: float
    holder_K: float = 0.0  # constant of the (1/2 + alpha)-Hoelder bound on sigma
    time_holder_K: Optional[float] = 0.0  # None: no time regularity claimed

    def __post_init__(self):
        if self.one_sided_lipschitz_K < 0:
            raise ArgumentError("one_sided_lipschitz_K must be nonnegative")
        if self.ellipticity_lambda0 < 1:
            raise ArgumentError("ellipticity_lambda0 must be >= 1")
        if not 0.0 <= self.holder_alpha <= 0.5:
            raise ArgumentError("holder_alpha must lie in [0, 1/2]")
        if self.holder_beta_time < 0.5:
            raise ArgumentError("holder_beta_time must be >= 1/2")
        if self.drift_bound < 0:
            raise ArgumentError("drift_bound must be nonnegative")
        if self.holder_K < 0:
            raise ArgumentError("holder_K must be nonnegative")
        if self.time_holder_K is not None and self.time_holder_K < 0:
            raise ArgumentError("time_holder_K must be nonnegative")

    @property
    def holder_exponent(self) -> float:
        """Space Hoelder exponent of sigma."""
        return 0.5 + self.holder_alpha


@dataclass(frozen=True, eq=False)
class SdeProblem:
    """
    dX_t = b(t, X_t) dt + sigma(t, X_t) dW_t on [0, T], X_0 = x0.
    Coefficient callables must be pure and vectorized over leading axes.
    """
    name: str
    dim_d: int
    horizon_T: float
    x0: Tuple[float, ...]
    drift: Coefficient
    diffusion: Coefficient
    meta: CoeffMeta
    time_homogeneous: bool = True
    description: str = ""

    def __post_init__(self):
        if self.dim_d < 1:
            raise ArgumentError("dim_d must be a positive integer")
        if self.horizon_T <= 0:
            raise ArgumentError("horizon_T must be positive")
        if len(self.x0) != self.dim_d:
            raise ArgumentError(
                f"x0 has length {len(self.x0)}, expected {self.dim_d}"
            )
        object.__setattr__(self, "x0", tuple(float(v) for v in self.x0))

    @property
    def x0_array(self) -> np.ndarray:
        return np.asarray(self.x0, dtype=float)

    def covariance(self, t, x) -> np.ndarray:
        """a = sigma sigma^* at (t, x)."""
        sigma = np.asarray(self.diffusion(t, x), dtype=float)
        return sigma @ np.swapaxes(sigma, -1, -2)


_STOPPING_PATTERN = re.compile(r"^\s*(\w+)\s*(?:\(\s*([^)]*)\s*\))?\s*$")


@dataclass(frozen=True)
class StoppingTimeSpec:
    """A stopping time tau <= T from a documented finite family."""
    kind: StoppingKind
    value: Optional[float] = None

    def __post_init__(self):
        if self.kind == StoppingKind.HORIZON:
            if self.value is not None:
                raise ArgumentError("horizon takes no parameter")
        elif self.value is None:
            raise ArgumentError(f"{self.kind.value} needs a parameter")
        elif self.kind == StoppingKind.FIRST_EXIT and self.value <= 0:
            raise ArgumentError("first_exit radius must be positive")
        elif self.kind == StoppingKind.DETERMINISTIC and self.value < 0:
            raise ArgumentError("deterministic time must be nonnegative")

    @classmethod
    def horizon(cls) -> "StoppingTimeSpec":
        return cls(StoppingKind.HORIZON)

    @classmethod
    def deterministic(cls, t: float) -> "StoppingTimeSpec":
        return cls(StoppingKind.DETERMINISTIC, float(t))

    @classmethod
    def first_exit(cls, radius: float) -> "StoppingTimeSpec":
        return cls(StoppingKind.FIRST_EXIT, float(radius))

    @classmethod
    def parse(cls, text: str) -> "StoppingTimeSpec":
        """Parse 'horizon', 'deterministic(0.5)' or 'first_exit(1.0)'."""
        match = _STOPPING_PATTERN.match(text)
        if not match:
            raise ArgumentError(f"Cannot parse stopping time '{text}'")
        name, arg = match.group(1), match.group(2)
        try:
            kind = StoppingKind(name)
        except ValueError:
            valid = ", ".join(k.value for k in StoppingKind)
            raise ArgumentError(f"Unknown stopping time '{name}' (valid: {valid})")
        if not arg:
            return cls(kind)
        try:
            return cls(kind, float(arg))
        except ValueError:
            raise ArgumentError(f"Stopping time parameter '{arg}' is not a number")

    @property
    def label(self) -> str:
        if self.value is None:
            return self.kind.value
        return f"{self.kind.value}({self.value!r})"


def _check_power_of_two(n: int, what: str) -> int:
    if n < 1 or n & (n - 1):
        raise ArgumentError(f"{what} must be a power of 2, got {n}")
    return n.bit_length() - 1


@dataclass(frozen=True, eq=False)
class BrownianPath:
    """
    Increments of a d-dimensional Brownian motion on the dyadic grid t_k = kT/2^L.
    `increments` has shape (..., 2^L, d); leading axes index independent paths.
    """
    dim_d: int
    level_L: int
    horizon_T: float
    increments: np.ndarray

    def __post_init__(self):
        increments = np.array(self.increments, dtype=float)
        expected = (2 ** self.level_L, self.dim_d)
        if increments.ndim < 2 or increments.shape[-2:] != expected:
            raise ArgumentError(
                f"increments shape {increments.shape} does not end with {expected}"
            )
        increments.setflags(write=False)
        object.__setattr__(self, "increments", increments)

    @property
    def n_fine(self) -> int:
        return 2 ** self.level_L

    @property
    def dt(self) -> float:
        return self.horizon_T / self.n_fine

    @property
    def batch_shape(self) -> Tuple[int, ...]:
        return self.increments.shape[:-2]

    def values(self) -> np.ndarray:
        """W at grid times, shape (..., 2^L + 1, d), W_0 = 0."""
        zero = np.zeros(self.batch_shape + (1, self.dim_d))
        return np.concatenate([zero, np.cumsum(self.increments, axis=-2)], axis=-2)


@dataclass(frozen=True, eq=False)
class GridPath:
    """One scheme trajectory (or a block of them) on a uniform grid."""
    n_steps: int
    times: np.ndarray
    states: np.ndarray  # (..., n_steps + 1, d)
    scheme: SchemeKind
    problem: SdeProblem
    brownian: BrownianPath

    def __post_init__(self):
        _check_power_of_two(self.n_steps, "n_steps")
        for array in (self.times, self.states):
            array.setflags(write=False)

    @property
    def level(self) -> int:
        return self.n_steps.bit_length() - 1

    @property
    def terminal(self) -> np.ndarray:
        return self.states[..., -1, :]


@dataclass(frozen=True, eq=False)
class DeviationSample:
    """Per-path deviation statistics of Y = X_fine - X_coarse."""
    taus: Tuple[StoppingTimeSpec, ...]
    p_exponent: float
    tau_abs: np.ndarray      # (..., len(taus)) values |Y_tau|
    sup_p: np.ndarray        # (...) max_k |Y_{t_k}|^p over fine times
    terminal_p: np.ndarray   # (...) |Y_T|^p


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo estimate with its standard error."""
    value: float
    std_error: float
    paths: int = 0

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class MomentEstimate(Estimate):
    """Increment moment estimate; `time` is where the max over midpoints sits."""
    time: float = 0.0


@dataclass
class AssumptionReport:
    """Spot checks of the coefficient assumptions on random samples."""
    problem: str
    samples: int
    seed: int
    violations: Dict[str, int] = field(default_factory=dict)
    worst: Dict[str, float] = field(default_factory=dict)
    checked: Dict[str, bool] = field(default_factory=dict)

    @property
    def total_violations(self) -> int:
        return sum(self.violations.values())


@dataclass
class PropertyReport:
    """Pointwise inequality checks: violation counts and worst excess per property."""
    name: str
    points: int
    violations: Dict[str, int] = field(default_factory=dict)
    max_violation: Dict[str, float] = field(default_factory=dict)
    extras: Dict[str, float] = field(default_factory=dict)

    @property
    def total_violations(self) -> int:
        return sum(self.violations.values())


@dataclass
class A3Sample:
    """One weighted-gradient integral of the third class condition."""
    N: int
    shift: Tuple[float, ...]
    u: float
    integral: float
    ratio: float  # integral / (1 + sqrt(u))


@dataclass
class ConditionReport:
    """Numerical evidence for the three class conditions of a mollifier sequence."""
    base: str
    L: float
    N_list: List[int]
    a1_integrals: List[float]
    a1_decay_ratios: List[float]
    a1_monotone: bool
    a2_sup: float
    a2_bound: float
    a2_ok: bool
    a3_samples: List[A3Sample]
    a3_K: float


@dataclass
class ConvergenceReport:
    """Time-integrated Monte Carlo gap between mollified and original function."""
    base: str
    problem: str
    n_steps: int
    kappa: float
    paths: int
    N_list: List[int]
    estimates: List[float]
    std_errors: List[float]
    oracle: Optional[List[float]] = None
    limit: Optional[float] = None        # same functional for the unmollified base
    limit_std_error: Optional[float] = None


@dataclass
class DensityCheckReport:
    """Histogram of X_t^{(n)} compared against two-sided Gaussian envelopes."""
    problem: str
    n_steps: int
    t: float
    paths: int
    C: float
    c: float
    edges: List[List[float]]  # per coordinate
    counts: List[int]         # flattened, C order
    upper_violations: int
    lower_violations: int
    lower_eligible_bins: int
    required_C_upper: float
    required_C_lower: float
    fitted_C_upper: float
    fitted_c_upper: float
    fitted_C_lower: float
    fitted_c_lower: float
    band_z: float = 3.0       # per-bin standard errors after the simultaneous widening

    @property
    def violations(self) -> int:
        return self.upper_violations + self.lower_violations


@dataclass
class EnvelopeCalibration:
    """Result of the (C, c) grid search."""
    C: float
    c: float
    raw_C: float
    margin: float
    paths: int


@dataclass
class DiscontinuityProfile:
    """Key estimate over several n: raw and sqrt(n)-scaled integrals."""
    problem: str
    q: float
    paths: int
    n_list: List[int]
    estimates: List[Estimate]
    scaled: List[float]
    spread: float                  # max(scaled) / min(scaled)
    ratio_64_256: Optional[float]


@dataclass(frozen=True)
class RatePoint:
    n: int
    error: float
    std_error: float


@dataclass(frozen=True)
class LogModelFit:
    """error ~ a (log n)^(-gamma)."""
    gamma: float
    a: float
    residual_rms: float


@dataclass(frozen=True)
class AcceptanceResult:
    lower: Optional[float]
    upper: Optional[float]
    passed: bool
    reason: str = ""


@dataclass
class RateReport:
    """Per-n strong error estimates and the fitted convergence rate."""
    problem: str
    scheme: SchemeKind
    norm: NormKind
    p_exponent: float
    paths: int
    ref_level_L: int
    per_n: List[RatePoint]
    fitted_slope: Optional[float] = None
    intercept: Optional[float] = None
    slope_ci: Optional[Tuple[float, float]] = None
    theory_slope: Optional[float] = None
    theory_kind: str = "power"
    theory_note: str = ""
    log_model_fit: Optional[LogModelFit] = None
    dropped_n: Optional[int] = None
    exact: bool = False
    label: str = ""
    tau_labels: List[str] = field(default_factory=list)
    acceptance: Optional[AcceptanceResult] = None


@dataclass
class SchemeComparison:
    """Rate reports of several schemes driven by identical Brownian paths."""
    reports: Dict[str, RateReport]
    slopes_consistent: bool
    identical: bool


@dataclass
class SensitivityRow:
    n: int
    error: float             # against the configured reference level
    refined_error: float     # against the finer reference
    std_error: float
    stable: bool


@dataclass
class SensitivityReport:
    """Change of the error estimates when the reference grid is refined."""
    problem: str
    ref_level_L: int
    refined_level_L: int
    rows: List[SensitivityRow]

    @property
    def passed(self) -> bool:
        return all(row.stable for row in self.rows)


@dataclass(frozen=True, eq=False)
class ExperimentSpec:
    """Everything the rate harness needs for one coupled fine/coarse run."""
    problem: SdeProblem
    scheme: SchemeKind = SchemeKind.STANDARD
    n_list: Tuple[int, ...] = tuple(2 ** k for k in range(4, 11))
    ref_level_L: int = 14
    p_exponent: float = 1.0
    norm: NormKind = NormKind.SUP
    taus: Tuple[StoppingTimeSpec, ...] = (StoppingTimeSpec(StoppingKind.HORIZON),)
    paths: int = 10_000
    master_seed: int = 0
    block_size: int = 256
    budget: float = 4e9  # max paths * 2^L * d
    slope_band: Optional[Tuple[Optional[float], Optional[float]]] = None

    def __post_init__(self):
        n_list = tuple(sorted(int(n) for n in self.n_list))
        if len(n_list) < 3:
            raise ArgumentError("n_list needs at least 3 entries for regression")
        if len(set(n_list)) != len(n_list):
            raise ArgumentError("n_list entries must be distinct")
        for n in n_list:
            _check_power_of_two(n, "n")
        if 2 ** self.ref_level_L <= n_list[-1]:
            raise ArgumentError(
                f"reference grid 2^{self.ref_level_L} must exceed max n = {n_list[-1]}"
            )
        if not 1.0 <= self.p_exponent <= 8.0:
            raise ArgumentError("p_exponent must lie in [1, 8]")
        if self.paths < 2:
            raise ArgumentError("paths must be at least 2")
        if self.block_size < 1:
            raise ArgumentError("block_size must be positive")
        if not self.taus:
            raise ArgumentError("taus must not be empty")
        for tau in self.taus:
            if tau.kind == StoppingKind.DETERMINISTIC and tau.value > self.problem.horizon_T:
                raise ArgumentError(f"{tau.label} lies beyond the horizon")
        object.__setattr__(self, "n_list", n_list)
        object.__setattr__(self, "taus", tuple(self.taus))

    @property
    def reference_steps(self) -> int:
        return 2 ** self.ref_level_L

    @property
    def work(self) -> float:
        return float(self.paths) * self.reference_steps * self.problem.dim_d


def level_of(n: int) -> int:
    """log2 of a power-of-two step count (argument error otherwise)."""
    return _check_power_of_two(int(n), "n")
