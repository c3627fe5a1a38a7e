"""
Rate fits: least squares of log(error) on log(n) with a t-based slope
interval, and the log model error = a (log n)^-gamma for logarithmic rates.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from ..data.models import LogModelFit
from ..errors import ArgumentError

logger = logging.getLogger(__name__)

TRANSIENT_SIGMAS = 3.0


@dataclass
class PowerLawFit:
    slope: float
    intercept: float
    slope_ci: Tuple[float, float]
    dropped_n: Optional[int] = None


def _positive(ns: Sequence[int], errors: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    ns = np.asarray(ns, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if ns.shape != errors.shape:
        raise ArgumentError("ns and errors must have the same length")
    if np.any(errors <= 0):
        raise ArgumentError("errors must be positive for a log-log fit")
    return ns, errors


def _linear_fit(log_n: np.ndarray, log_e: np.ndarray, confidence: float):
    result = stats.linregress(log_n, log_e)
    dof = log_n.size - 2
    if dof > 0:
        half = stats.t.ppf(0.5 + confidence / 2.0, dof) * result.stderr
    else:
        half = math.inf
    return result.slope, result.intercept, (result.slope - half, result.slope + half)


def fit_power_law(
    ns: Sequence[int],
    errors: Sequence[float],
    confidence: float = 0.95,
    drop_transient: bool = True,
) -> PowerLawFit:
    """
    Fit log(error) = intercept + slope log(n). The smallest n is dropped when
    it sits more than 3 residual standard deviations off the line through the
    remaining points (needs at least 4 points).
    """
    ns, errors = _positive(ns, errors)
    if ns.size < 3:
        raise ArgumentError("at least 3 points are needed for a rate fit")
    order = np.argsort(ns)
    log_n, log_e = np.log(ns[order]), np.log(errors[order])

    dropped = None
    if drop_transient and ns.size >= 4:
        slope, intercept, _ = _linear_fit(log_n[1:], log_e[1:], confidence)
        rest = log_e[1:] - (intercept + slope * log_n[1:])
        sigma = math.sqrt(float(np.sum(rest ** 2)) / max(rest.size - 2, 1))
        first = log_e[0] - (intercept + slope * log_n[0])
        if sigma > 0 and abs(first) > TRANSIENT_SIGMAS * sigma:
            dropped = int(ns[order][0])
            log_n, log_e = log_n[1:], log_e[1:]
            logger.info("dropping n=%d from the fit as a pre-asymptotic transient", dropped)

    slope, intercept, ci = _linear_fit(log_n, log_e, confidence)
    return PowerLawFit(float(slope), float(intercept), (float(ci[0]), float(ci[1])), dropped)


def fit_log_model(ns: Sequence[int], errors: Sequence[float], gamma: float) -> LogModelFit:
    """Least-squares a in error = a (log n)^-gamma; residual rms on the log scale."""
    ns, errors = _positive(ns, errors)
    if np.any(ns < 2):
        raise ArgumentError("log model needs n >= 2")
    basis = np.log(ns) ** -gamma
    a = float(np.dot(basis, errors) / np.dot(basis, basis))
    residual = np.log(errors) - np.log(a * basis)
    return LogModelFit(gamma=float(gamma), a=a, residual_rms=float(np.sqrt(np.mean(residual ** 2))))
