"""
Spot checks of the coefficient assumptions on random samples:
uniform ellipticity, space Hoelder continuity of sigma, the one-sided
Lipschitz inequality for b, the drift bound and (when claimed) time regularity.
"""
import logging

import numpy as np

from ..data.models import AssumptionReport, SdeProblem
from ..errors import ArgumentError

logger = logging.getLogger(__name__)

BOX_HALF_WIDTH = 5.0
MIN_SEPARATION = 1e-9
TOLERANCE = 1e-12


def _record(report: AssumptionReport, name: str, excess: np.ndarray):
    """Store the count of positive excesses and the worst one."""
    excess = np.asarray(excess, dtype=float)
    bad = excess > TOLERANCE
    report.violations[name] = int(np.count_nonzero(bad))
    report.worst[name] = float(excess[bad].max()) if bad.any() else 0.0
    report.checked[name] = True


def verify_assumptions(p: SdeProblem, samples: int, seed: int) -> AssumptionReport:
    """
    Draw `samples` tuples (t, x, y, xi): t ~ U[0, T], x, y ~ U[-5, 5]^d,
    xi uniform on the unit sphere, and report worst-case violations.
    """
    if samples < 1:
        raise ArgumentError("samples must be >= 1")

    rng = np.random.default_rng(seed)
    d, meta = p.dim_d, p.meta
    t = rng.uniform(0.0, p.horizon_T, size=samples)
    s = rng.uniform(0.0, p.horizon_T, size=samples)
    x = rng.uniform(-BOX_HALF_WIDTH, BOX_HALF_WIDTH, size=(samples, d))
    y = rng.uniform(-BOX_HALF_WIDTH, BOX_HALF_WIDTH, size=(samples, d))
    xi = rng.standard_normal(size=(samples, d))
    xi /= np.linalg.norm(xi, axis=-1, keepdims=True)

    report = AssumptionReport(problem=p.name, samples=samples, seed=seed)

    # Ellipticity: 1/lambda0 <= <a xi, xi> <= lambda0
    a = p.covariance(t, x)
    quadratic = np.einsum("...i,...ij,...j->...", xi, a, xi)
    lam = meta.ellipticity_lambda0
    _record(report, "ellipticity", np.maximum(1.0 / lam - quadratic, quadratic - lam))

    # Hoelder quotient of sigma in space
    sigma_x = np.asarray(p.diffusion(t, x), dtype=float)
    sigma_y = np.asarray(p.diffusion(t, y), dtype=float)
    distance = np.linalg.norm(x - y, axis=-1)
    keep = distance >= MIN_SEPARATION
    gap = np.linalg.norm((sigma_x - sigma_y).reshape(samples, -1), axis=-1)
    quotient = gap[keep] / distance[keep] ** meta.holder_exponent
    _record(report, "holder", quotient - meta.holder_K)

    # One-sided Lipschitz: <x - y, b(t,x) - b(t,y)> <= K |x - y|^2
    b_x = np.asarray(p.drift(t, x), dtype=float)
    b_y = np.asarray(p.drift(t, y), dtype=float)
    if b_x.shape != x.shape:
        raise ArgumentError(f"drift returned shape {b_x.shape}, expected {x.shape}")
    inner = np.einsum("...i,...i->...", x - y, b_x - b_y)
    _record(report, "one_sided_lipschitz", inner - meta.one_sided_lipschitz_K * distance ** 2)

    _record(report, "drift_bound", np.linalg.norm(b_x, axis=-1) - meta.drift_bound)

    if meta.time_holder_K is None:
        report.checked["time_holder"] = False
        report.violations["time_holder"] = 0
        report.worst["time_holder"] = 0.0
    else:
        b_s = np.asarray(p.drift(s, x), dtype=float)
        sigma_s = np.asarray(p.diffusion(s, x), dtype=float)
        change = (
            np.linalg.norm(b_x - b_s, axis=-1)
            + np.linalg.norm((sigma_x - sigma_s).reshape(samples, -1), axis=-1)
        )
        _record(report, "time_holder",
                change - meta.time_holder_K * np.abs(t - s) ** meta.holder_beta_time)

    logger.info(
        "verify_assumptions(%s): %d violations over %d samples",
        p.name, report.total_violations, samples,
    )
    return report
