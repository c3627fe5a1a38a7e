"""
Yamada-Watanabe approximation of |x|.

psi is built in log-coordinates u = log z on [log(eps/delta), log eps]:
a trapezoidal window w with linear ramps of width (log delta)/4 and plateau 1,
psi(z) = c w(log z) / z with c = 4 / (3 log delta), so that the integral of
psi is 1 and psi <= 2 / (z log delta). phi' and phi have closed forms.
"""
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np
from scipy import integrate

from ..data.models import PropertyReport
from ..errors import ArgumentError

logger = logging.getLogger(__name__)

GRID_LOW, GRID_HIGH, GRID_POINTS = 1e-6, 10.0, 10_000
VECTOR_DIMS = (2, 3)
TOLERANCE = 1e-12


@dataclass(frozen=True)
class YWFunction:
    """The triple (psi, phi, Phi = phi(|.|)) for one (delta, eps) pair."""
    delta: float
    eps: float

    def __post_init__(self):
        if not self.delta > 1:
            raise ArgumentError(f"delta must exceed 1, got {self.delta}")
        if not 0 < self.eps < 1:
            raise ArgumentError(f"eps must lie in (0, 1), got {self.eps}")

    @property
    def log_delta(self) -> float:
        return math.log(self.delta)

    @property
    def support(self) -> Tuple[float, float]:
        return self.eps / self.delta, self.eps

    @property
    def _window(self) -> Tuple[float, float, float]:
        """(u_low, u_high, ramp width) in log-coordinates."""
        u_high = math.log(self.eps)
        return u_high - self.log_delta, u_high, self.log_delta / 4.0

    @property
    def scale(self) -> float:
        return 4.0 / (3.0 * self.log_delta)

    def _w(self, u: np.ndarray) -> np.ndarray:
        low, high, ramp = self._window
        rising = (u - low) / ramp
        falling = (high - u) / ramp
        return np.clip(np.minimum(np.minimum(rising, falling), 1.0), 0.0, None)

    def _w_integral(self, u: np.ndarray) -> np.ndarray:
        """Integral of w from u_low to u."""
        low, high, ramp = self._window
        u = np.clip(u, low, high)
        rise = np.clip(u, low, low + ramp) - low
        flat = np.clip(u, low + ramp, high - ramp) - (low + ramp)
        fall_end = high - np.clip(u, high - ramp, high)  # distance from u to high inside last ramp
        fall = np.where(u > high - ramp, ramp / 2.0 - fall_end ** 2 / (2.0 * ramp), 0.0)
        return rise ** 2 / (2.0 * ramp) + flat + fall

    def _weighted_integral(self, u: np.ndarray) -> np.ndarray:
        """Integral of w(v) e^v from u_low to u (= integral of z psi(z) dz / c)."""
        low, high, ramp = self._window
        u = np.clip(u, low, high)

        def rising(v):
            return np.exp(v) * (v - low - 1.0) / ramp

        def falling(v):
            return np.exp(v) * (high - v + 1.0) / ramp

        v1 = np.clip(u, low, low + ramp)
        v2 = np.clip(u, low + ramp, high - ramp)
        v3 = np.clip(u, high - ramp, high)
        return (
            rising(v1) - rising(low)
            + np.exp(v2) - math.exp(low + ramp)
            + falling(v3) - falling(high - ramp)
        )

    @staticmethod
    def _log_abs(x: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(np.abs(x))

    def psi(self, z):
        z = np.asarray(z, dtype=float)
        positive = z > 0
        safe = np.where(positive, z, 1.0)
        value = self.scale * self._w(np.log(safe)) / safe
        return np.where(positive, value, 0.0)

    def phi_prime(self, x):
        """phi'(x) = sign(x) * integral_0^|x| psi."""
        x = np.asarray(x, dtype=float)
        return np.sign(x) * self.scale * self._w_integral(self._log_abs(x))

    def phi_double_prime(self, x):
        """phi''(x) = psi(|x|)."""
        return self.psi(np.abs(np.asarray(x, dtype=float)))

    def phi(self, x):
        """phi(x) = |x| phi'(|x|) - integral_0^|x| z psi(z) dz."""
        y = np.abs(np.asarray(x, dtype=float))
        log_y = self._log_abs(y)
        value = y * self.scale * self._w_integral(log_y) - self.scale * self._weighted_integral(log_y)
        return np.where(y > 0, value, 0.0)

    def Phi(self, x):
        """Multi-dimensional version phi(|x|) for x of shape (..., d)."""
        return self.phi(np.linalg.norm(np.asarray(x, dtype=float), axis=-1))


def build(delta: float, eps: float) -> YWFunction:
    return YWFunction(float(delta), float(eps))


def proof_parameters(n: int) -> List[Tuple[float, float]]:
    """The two (delta, eps) pairs the strong-rate proofs use for n steps."""
    if n < 2:
        raise ArgumentError("n must be at least 2")
    return [(2.0, n ** -0.5), (n ** (1.0 / 3.0), 1.0 / math.log(n))]


def normalization_error(f: YWFunction) -> float:
    """|integral of psi - 1| by adaptive quadrature in log-coordinates."""
    low, high, ramp = f._window
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        # psi(z) dz = c w(u) du with z = e^u
        value, _ = integrate.quad(
            lambda u: f.scale * float(f._w(np.asarray(u))),
            low, high, points=[low + ramp, high - ramp], epsabs=1e-13, epsrel=1e-13,
        )
    return abs(value - 1.0)


def default_grid(points: int = GRID_POINTS) -> np.ndarray:
    """Log-spaced points in [1e-6, 10] plus the origin."""
    return np.concatenate([[0.0], np.logspace(math.log10(GRID_LOW), math.log10(GRID_HIGH), points)])


def _record(report: PropertyReport, name: str, excess: np.ndarray):
    excess = np.asarray(excess, dtype=float)
    bad = excess > TOLERANCE
    report.violations[name] = int(np.count_nonzero(bad))
    report.max_violation[name] = float(excess[bad].max()) if bad.any() else 0.0


def check_properties(
    f: YWFunction,
    grid: Optional[Iterable[float]] = None,
    vector_samples: int = 2_000,
    seed: int = 0,
) -> PropertyReport:
    """
    Evaluate the four properties pointwise:
      (phi1) |x| <= eps + Phi(x)            (also for vectors in d = 2, 3)
      (phi2) 0 <= |phi'(x)| <= 1
      (phi3) phi'(|x|) / |x| <= delta / eps  (x != 0)
      (phi4) phi''(+-|x|) = psi(|x|) <= 2 / (|x| log delta) 1_[eps/delta, eps](|x|)
    """
    radii = np.abs(np.asarray(list(grid) if grid is not None else default_grid(), dtype=float))
    if radii.size == 0:
        raise ArgumentError("grid must not be empty")
    low, high = f.support
    report = PropertyReport(name=f"yw(delta={f.delta!r}, eps={f.eps!r})", points=int(radii.size))

    scalars = np.concatenate([radii, -radii])
    excess_phi1 = [np.abs(scalars) - f.eps - f.phi(scalars)]
    rng = np.random.default_rng(seed)
    for dim in VECTOR_DIMS:
        directions = rng.standard_normal((vector_samples, dim))
        directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
        lengths = rng.choice(radii, size=vector_samples)
        vectors = directions * lengths[:, None]
        excess_phi1.append(np.linalg.norm(vectors, axis=-1) - f.eps - f.Phi(vectors))
    _record(report, "phi1", np.concatenate(excess_phi1))

    slope = np.abs(f.phi_prime(scalars))
    _record(report, "phi2", np.maximum(slope - 1.0, -slope))

    nonzero = radii[radii > 0]
    _record(report, "phi3", f.phi_prime(nonzero) / nonzero - f.delta / f.eps)

    inside = (nonzero >= low) & (nonzero <= high)
    bound = np.where(inside, 2.0 / (nonzero * f.log_delta), 0.0)
    curvature = np.maximum(f.phi_double_prime(nonzero), f.phi_double_prime(-nonzero))
    _record(report, "phi4", curvature - bound)

    report.extras["normalization_error"] = normalization_error(f)
    report.extras["support_low"] = low
    report.extras["support_high"] = high
    logger.info("%s: %d violations", report.name, report.total_violations)
    return report


def sample_table(f: YWFunction, points: int = 400) -> List[Tuple[float, float, float, float]]:
    """Rows (z, psi, phi', phi'') on a log grid around the support, for plotting."""
    low, high = f.support
    z = np.logspace(math.log10(low) - 0.5, math.log10(high) + 0.5, points)
    return list(zip(z.tolist(), f.psi(z).tolist(), f.phi_prime(z).tolist(), f.phi_double_prime(z).tolist()))
