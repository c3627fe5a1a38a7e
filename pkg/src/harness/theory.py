"""
Convergence rates predicted for each norm from the drift and diffusion regularity.

d = 1 covers every alpha in [0, 1/2]; d >= 2 only alpha = 1/2, where the
terminal, sup and p = 2 moment rates all equal n^-1/2 (2 alpha^2 = alpha = 1/2).
alpha = 0 gives logarithmic rates, reported as a log model rather than a slope.
"""
from dataclasses import dataclass
from typing import Optional

from ..data.models import NormKind


@dataclass(frozen=True)
class TheoryRate:
    kind: str                 # "power", "log" or "none"
    slope: Optional[float]    # exponent of n for power rates
    gamma: Optional[float]    # exponent of 1 / log n for log rates
    source: str


def theory_rate(norm: NormKind, alpha: float, dim_d: int, p_exponent: float = 1.0) -> TheoryRate:
    """Predicted decay of the error functional `norm` for Hoelder exponent 1/2 + alpha."""
    # sup_p moments below 2 follow from the p = 2 bound by Jensen
    moment = min(p_exponent, 2.0) / 2.0 if norm == NormKind.SUP_P else 1.0

    if dim_d >= 2:
        if abs(alpha - 0.5) > 1e-12:
            return TheoryRate("none", None, None, f"no rate stated for d={dim_d}, alpha={alpha}")
        return TheoryRate("power", -0.5 * moment, None, f"d>=2, alpha=1/2: n^-{0.5 * moment:g}")

    if norm == NormKind.TERMINAL_STOPPING:
        if alpha == 0:
            return TheoryRate("log", None, 1.0, "alpha=0: (log n)^-1")
        return TheoryRate("power", -alpha, None, f"n^-alpha = n^-{alpha:g}")

    if norm == NormKind.SUP:
        if alpha == 0:
            return TheoryRate("log", None, 0.5, "alpha=0: (log n)^-1/2")
        direct, jensen = 2.0 * alpha ** 2, alpha / 2.0
        if jensen > direct:
            return TheoryRate(
                "power", -jensen, None,
                f"n^-alpha/2 = n^-{jensen:g}, a bound derived from the p = 1 moment rate; "
                f"the stated sup-norm rate is n^-2alpha^2 = n^-{direct:g}",
            )
        return TheoryRate("power", -direct, None, f"n^-2alpha^2 = n^-{direct:g}")

    if alpha == 0:
        return TheoryRate("log", None, moment, f"alpha=0: (log n)^-{moment:g}")
    return TheoryRate("power", -alpha * moment, None, f"n^-{alpha * moment:g}")
