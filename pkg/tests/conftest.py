"""Shared fixtures: catalog problems and small Brownian batches."""
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.data.models import CoeffMeta, SdeProblem  # noqa: E402
from src.data.presets import IdentityDiffusion, SignDrift  # noqa: E402
from src.tools.brownian import generate_batch  # noqa: E402
from src.tools.catalog import preset  # noqa: E402


@pytest.fixture
def sign_drift() -> SdeProblem:
    return preset("sign_drift")


@pytest.fixture
def brownian_problem() -> SdeProblem:
    return preset("brownian")


@pytest.fixture
def monotone_2d() -> SdeProblem:
    return preset("monotone_2d")


@pytest.fixture
def shifted_sign_drift() -> SdeProblem:
    """Sign drift started at x0 = 1, T = 2."""
    return SdeProblem(
        name="shifted_sign_drift",
        dim_d=1,
        horizon_T=2.0,
        x0=(1.0,),
        drift=SignDrift(),
        diffusion=IdentityDiffusion(1),
        meta=CoeffMeta(
            one_sided_lipschitz_K=0.0,
            ellipticity_lambda0=1.0,
            holder_alpha=0.5,
            holder_beta_time=1.0,
            drift_bound=1.0,
        ),
    )


@pytest.fixture
def small_batch():
    """64 one-dimensional paths at level 8 on [0, 1]."""
    return generate_batch(1, 8, 1.0, 1234, range(64))
