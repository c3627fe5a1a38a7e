"""
Preset catalog of SDE problems used by every experiment.
Coefficients are module-level frozen dataclasses so problems can be
shipped to worker processes.
"""
import re
from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

import numpy as np

from ..errors import ArgumentError, CatalogError
from .models import CoeffMeta, SdeProblem


def _time_column(t, x: np.ndarray) -> np.ndarray:
    """Broadcast a scalar or per-path time against x[..., d]."""
    return np.asarray(t, dtype=float)[..., None] * np.ones_like(x[..., :1])


@dataclass(frozen=True)
class SignDrift:
    """b_i(x) = scale if x_i <= 0 else -scale, coordinate-wise."""
    scale: float = 1.0

    def __call__(self, t, x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= 0.0, self.scale, -self.scale)


@dataclass(frozen=True)
class RegimeSwitchDrift:
    """Sign drift whose magnitude jumps from `before` to `after` at `switch_time`."""
    switch_time: float
    before: float = 1.0
    after: float = 2.0

    def __call__(self, t, x):
        x = np.asarray(x, dtype=float)
        scale = np.where(_time_column(t, x) < self.switch_time, self.before, self.after)
        return np.where(x <= 0.0, scale, -scale)


@dataclass(frozen=True)
class ZeroDrift:
    def __call__(self, t, x):
        return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class IdentityDiffusion:
    """sigma = identity in dimension d."""
    dim_d: int = 1

    def __call__(self, t, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.eye(self.dim_d), x.shape[:-1] + (self.dim_d, self.dim_d))


@dataclass(frozen=True)
class HolderDiffusion:
    """sigma(x) = 1 + min(|x|, 1)^(1/2 + alpha) / 2 in d = 1, valued in [1, 3/2]."""
    alpha: float

    def __call__(self, t, x):
        x = np.asarray(x, dtype=float)
        radius = np.minimum(np.abs(x[..., :1]), 1.0)
        return (1.0 + 0.5 * radius ** (0.5 + self.alpha))[..., None]


def _sign_drift() -> SdeProblem:
    return SdeProblem(
        name="sign_drift",
        dim_d=1,
        horizon_T=1.0,
        x0=(0.0,),
        drift=SignDrift(),
        diffusion=IdentityDiffusion(1),
        meta=CoeffMeta(
            one_sided_lipschitz_K=0.0,
            ellipticity_lambda0=1.0,
            holder_alpha=0.5,
            holder_beta_time=1.0,
            drift_bound=1.0,
        ),
        description="b(x) = 1 on (-inf, 0], -1 on (0, inf); sigma = 1",
    )


def _brownian() -> SdeProblem:
    return SdeProblem(
        name="brownian",
        dim_d=1,
        horizon_T=1.0,
        x0=(0.0,),
        drift=ZeroDrift(),
        diffusion=IdentityDiffusion(1),
        meta=CoeffMeta(
            one_sided_lipschitz_K=0.0,
            ellipticity_lambda0=1.0,
            holder_alpha=0.5,
            holder_beta_time=1.0,
            drift_bound=0.0,
        ),
        description="b = 0, sigma = 1; the scheme is exact",
    )


def _holder_diffusion(alpha: float) -> SdeProblem:
    if not 0.0 <= alpha <= 0.5:
        raise ArgumentError(f"holder_diffusion alpha must lie in [0, 1/2], got {alpha}")
    return SdeProblem(
        name=f"holder_diffusion({alpha!r})",
        dim_d=1,
        horizon_T=1.0,
        x0=(0.0,),
        drift=SignDrift(),
        diffusion=HolderDiffusion(alpha),
        meta=CoeffMeta(
            one_sided_lipschitz_K=0.0,
            ellipticity_lambda0=2.25,
            holder_alpha=alpha,
            holder_beta_time=1.0,
            drift_bound=1.0,
            holder_K=0.5,
        ),
        description=f"sign drift; sigma(x) = 1 + min(|x|, 1)^{0.5 + alpha!r} / 2",
    )


def _monotone_nd(dim_d: int) -> SdeProblem:
    if dim_d < 1:
        raise ArgumentError("monotone_nd needs a positive dimension")
    name = "monotone_2d" if dim_d == 2 else f"monotone_nd({dim_d})"
    return SdeProblem(
        name=name,
        dim_d=dim_d,
        horizon_T=1.0,
        x0=(0.0,) * dim_d,
        drift=SignDrift(),
        diffusion=IdentityDiffusion(dim_d),
        meta=CoeffMeta(
            one_sided_lipschitz_K=0.0,
            ellipticity_lambda0=1.0,
            holder_alpha=0.5,
            holder_beta_time=1.0,
            drift_bound=float(np.sqrt(dim_d)),
        ),
        description=f"sign drift per coordinate in d = {dim_d}; sigma = identity",
    )


def _regime_switch() -> SdeProblem:
    return SdeProblem(
        name="regime_switch",
        dim_d=1,
        horizon_T=1.0,
        x0=(0.0,),
        drift=RegimeSwitchDrift(switch_time=0.5),
        diffusion=IdentityDiffusion(1),
        meta=CoeffMeta(
            one_sided_lipschitz_K=0.0,
            ellipticity_lambda0=1.0,
            holder_alpha=0.5,
            holder_beta_time=1.0,
            drift_bound=2.0,
            time_holder_K=None,
        ),
        time_homogeneous=False,
        description="sign drift of size 1 before T/2 and 2 after; not Hoelder in time",
    )


# Fixed presets - name -> factory
PRESET_CATALOG: Dict[str, Callable[[], SdeProblem]] = {
    "sign_drift": _sign_drift,
    "brownian": _brownian,
    "monotone_2d": lambda: _monotone_nd(2),
    "regime_switch": _regime_switch,
}

# Parameterized families - name -> (factory, parameter converter)
FAMILY_CATALOG: Dict[str, Tuple[Callable[..., SdeProblem], Callable[[str], object]]] = {
    "holder_diffusion": (_holder_diffusion, float),
    "monotone_nd": (_monotone_nd, int),
}

_FAMILY_PATTERN = re.compile(r"^\s*([a-z_0-9]+)\s*\(\s*([^)]*?)\s*\)\s*$")


def catalog_names() -> List[str]:
    """All documented names; families are listed with their parameter."""
    names = list(PRESET_CATALOG)
    names.extend(f"{family}(<{converter.__name__}>)" for family, (_, converter) in FAMILY_CATALOG.items())
    return names


def build_preset(name: str) -> SdeProblem:
    """Build a preset or family member from its catalog name."""
    key = name.strip()
    if key in PRESET_CATALOG:
        return PRESET_CATALOG[key]()
    match = _FAMILY_PATTERN.match(key)
    if match and match.group(1) in FAMILY_CATALOG:
        factory, converter = FAMILY_CATALOG[match.group(1)]
        try:
            argument = converter(match.group(2))
        except ValueError:
            raise ArgumentError(
                f"Parameter '{match.group(2)}' of {match.group(1)} is not a valid {converter.__name__}"
            )
        return factory(argument)
    raise CatalogError(name, catalog_names())
