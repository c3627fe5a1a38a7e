"""Tests for the preset catalog, drift bases and assumption spot checks."""
import numpy as np
import pytest

from src.data.bases import build_base, constant, interval, product, step
from src.data.models import CoeffMeta, SdeProblem, StoppingKind, StoppingTimeSpec, level_of
from src.data.presets import IdentityDiffusion, build_preset, catalog_names
from src.errors import ArgumentError, CatalogError
from src.tools.assumptions import verify_assumptions
from src.tools.catalog import ProblemCatalog, preset


class _LinearDrift:
    def __call__(self, t, x):
        return 2.0 * np.asarray(x, dtype=float)


class TestCatalog:
    def test_fixed_presets_are_listed(self):
        names = catalog_names()
        for name in ("sign_drift", "brownian", "monotone_2d", "regime_switch"):
            assert name in names
        assert "holder_diffusion(<float>)" in names

    def test_family_member(self):
        p = build_preset("holder_diffusion(0.25)")
        assert p.dim_d == 1
        assert p.meta.holder_alpha == 0.25
        assert p.meta.holder_exponent == pytest.approx(0.75)

    def test_monotone_nd_dimension(self):
        p = build_preset("monotone_nd(3)")
        assert p.dim_d == 3
        assert p.x0 == (0.0, 0.0, 0.0)
        assert p.meta.drift_bound == pytest.approx(np.sqrt(3))

    def test_unknown_name_lists_valid_names(self):
        with pytest.raises(CatalogError) as info:
            preset("sgn_drift")
        assert "sign_drift" in str(info.value)
        assert isinstance(info.value, ArgumentError)

    def test_family_parameter_out_of_range(self):
        with pytest.raises(ArgumentError):
            build_preset("holder_diffusion(0.75)")

    def test_family_parameter_not_a_number(self):
        with pytest.raises(ArgumentError, match="not a valid float"):
            build_preset("holder_diffusion(abc)")

    def test_problems_are_cached(self):
        catalog = ProblemCatalog()
        assert catalog.get_problem("sign_drift") is catalog.get_problem("sign_drift")

    def test_register_custom_problem(self, shifted_sign_drift):
        catalog = ProblemCatalog()
        catalog.register(shifted_sign_drift)
        assert catalog.get_problem("shifted_sign_drift") is shifted_sign_drift
        assert "shifted_sign_drift" in catalog.list_problems()

    def test_fixed_presets_are_built(self):
        names = [p.name for p in ProblemCatalog().fixed_presets()]
        assert names == ["sign_drift", "brownian", "monotone_2d", "regime_switch"]

    def test_describe(self):
        assert "d=2" in ProblemCatalog().describe("monotone_2d")


class TestSdeProblem:
    def test_x0_length_must_match_dimension(self):
        with pytest.raises(ArgumentError):
            SdeProblem(
                name="bad", dim_d=2, horizon_T=1.0, x0=(0.0,),
                drift=_LinearDrift(), diffusion=IdentityDiffusion(2),
                meta=CoeffMeta(0.0, 1.0, 0.5, 1.0, 1.0),
            )

    def test_meta_rejects_small_ellipticity(self):
        with pytest.raises(ArgumentError):
            CoeffMeta(0.0, 0.5, 0.5, 1.0, 1.0)

    def test_meta_rejects_alpha_above_half(self):
        with pytest.raises(ArgumentError):
            CoeffMeta(0.0, 1.0, 0.6, 1.0, 1.0)

    def test_covariance_is_identity_for_brownian(self, brownian_problem):
        x = np.zeros((5, 1))
        np.testing.assert_allclose(brownian_problem.covariance(0.0, x), np.ones((5, 1, 1)))

    def test_sign_drift_convention_at_zero(self, sign_drift):
        np.testing.assert_array_equal(sign_drift.drift(0.0, np.array([[0.0], [1e-300], [-1.0]])),
                                      [[1.0], [-1.0], [1.0]])


class TestStoppingTimeSpec:
    def test_parse(self):
        assert StoppingTimeSpec.parse("horizon").kind == StoppingKind.HORIZON
        spec = StoppingTimeSpec.parse("first_exit(1.5)")
        assert spec.kind == StoppingKind.FIRST_EXIT and spec.value == 1.5
        assert StoppingTimeSpec.parse(" deterministic( 0.25 ) ").label == "deterministic(0.25)"

    @pytest.mark.parametrize("text", ["exit(1)", "first_exit", "first_exit(-1)", "deterministic(x)"])
    def test_invalid(self, text):
        with pytest.raises(ArgumentError):
            StoppingTimeSpec.parse(text)

    def test_level_of(self):
        assert level_of(1024) == 10
        with pytest.raises(ArgumentError):
            level_of(48)


class TestBases:
    def test_catalog_lookup(self):
        assert build_base("step").name == "step"
        base = build_base("interval(-0.5, 0.5)")
        np.testing.assert_array_equal(base(0.0, np.array([[-1.0], [0.0], [0.5]])), [0.0, 1.0, 0.0])

    def test_unknown_base(self):
        with pytest.raises(CatalogError):
            build_base("sawtooth")

    def test_interval_needs_order(self):
        with pytest.raises(ArgumentError):
            interval(1.0, 0.0)

    def test_product_bound_and_breakpoints(self):
        base = product(step(), interval(-1.0, 1.0))
        assert base.bound == 1.0
        assert base.coordinate_breakpoints(0) == (-1.0, 0.0, 1.0)
        np.testing.assert_array_equal(base(0.0, np.array([[-0.5], [0.5], [-2.0]])), [1.0, 0.0, 0.0])

    def test_product_dimension_mismatch(self):
        with pytest.raises(ArgumentError):
            product(step(1), constant(1.0, dim_d=2))

    def test_step_2d(self):
        base = build_base("step_2d")
        assert base.dim_d == 2
        np.testing.assert_array_equal(base(0.0, np.array([[-1.0, -1.0], [-1.0, 1.0]])), [1.0, 0.0])


class TestVerifyAssumptions:
    @pytest.mark.parametrize("name", ["sign_drift", "brownian", "monotone_2d", "holder_diffusion(0.0)",
                                      "holder_diffusion(0.25)", "holder_diffusion(0.5)"])
    def test_presets_satisfy_their_assumptions(self, name):
        report = verify_assumptions(preset(name), samples=5_000, seed=3)
        assert report.total_violations == 0, report.worst
        assert report.checked["time_holder"]

    def test_time_regularity_is_not_claimed_for_regime_switch(self):
        report = verify_assumptions(preset("regime_switch"), samples=2_000, seed=0)
        assert report.checked["time_holder"] is False
        assert report.violations["time_holder"] == 0
        assert report.total_violations == 0

    def test_expanding_drift_violates_one_sided_lipschitz(self):
        p = SdeProblem(
            name="expanding", dim_d=1, horizon_T=1.0, x0=(0.0,),
            drift=_LinearDrift(), diffusion=IdentityDiffusion(1),
            meta=CoeffMeta(0.0, 1.0, 0.5, 1.0, 10.0),
        )
        report = verify_assumptions(p, samples=1_000, seed=1)
        assert report.violations["one_sided_lipschitz"] > 0
        assert report.worst["one_sided_lipschitz"] > 0

    def test_samples_must_be_positive(self, sign_drift):
        with pytest.raises(ArgumentError):
            verify_assumptions(sign_drift, samples=0, seed=0)
