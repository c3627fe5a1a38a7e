"""Tests for density envelopes, discontinuity integrals and Komatsu's bound."""
import math

import numpy as np
import pytest
from scipy.integrate import trapezoid
from scipy.special import ndtr

from src.errors import ArgumentError
from src.tools.diagnostics import (
    calibrate_envelope, density_check, discontinuity_integral, discontinuity_profile,
    gaussian_envelope, komatsu_bound, komatsu_check, simultaneous_z,
)


class TestGaussianEnvelope:
    def test_integrates_to_one(self):
        x = np.linspace(-10, 10, 20_001)[:, None]
        values = gaussian_envelope(0.5, 1.0, [0.0], x)
        assert trapezoid(values, x[:, 0]) == pytest.approx(1.0, abs=1e-6)

    def test_peak(self):
        assert gaussian_envelope(1.0, 1.0, [0.0], np.zeros((1, 1)))[0] == pytest.approx(1 / math.sqrt(2 * math.pi))
        assert gaussian_envelope(1.0, 1.0, [0.0, 0.0], np.zeros((1, 2)))[0] == pytest.approx(1 / (2 * math.pi))


class TestSimultaneousBand:
    def test_one_bin_keeps_the_per_bin_band(self):
        assert simultaneous_z(3.0, 1) == pytest.approx(3.0)

    def test_widens_with_the_number_of_bins(self):
        widths = [simultaneous_z(3.0, bins) for bins in (1, 10, 42, 324)]
        assert all(a < b for a, b in zip(widths, widths[1:]))
        assert widths[2] == pytest.approx(4.0, abs=0.01)

    def test_bins_must_be_positive(self):
        with pytest.raises(ArgumentError):
            simultaneous_z(3.0, 0)


class TestDensityCheck:
    def test_brownian_marginal_fits_the_exact_envelope(self, brownian_problem):
        report = density_check(brownian_problem, 16, 16, 10_000, seed=0, C=1.0, c=1.0)
        assert report.t == 1.0
        assert sum(report.counts) == 10_000
        assert report.upper_violations == 0
        assert report.lower_violations == 0
        assert report.lower_eligible_bins > 0
        assert report.fitted_c_upper == pytest.approx(1.0, abs=0.15)
        assert report.band_z == pytest.approx(simultaneous_z(3.0, 42))

    def test_exact_envelope_holds_with_many_paths(self, brownian_problem):
        report = density_check(brownian_problem, 16, 16, 100_000, seed=13, C=1.0, c=1.0)
        assert report.violations == 0

    def test_edges_are_increasing_with_open_outer_bins(self, sign_drift):
        report = density_check(sign_drift, 16, 8, 10_000, seed=1, C=2.0, c=0.5)
        edges = np.asarray(report.edges[0])
        assert edges[0] == -np.inf and edges[-1] == np.inf
        assert np.all(np.diff(edges) > 0)
        assert len(report.counts) == edges.size - 1
        assert report.t == 0.5

    def test_tight_envelope_is_flagged(self, sign_drift):
        # a far too narrow upper envelope must be violated
        report = density_check(sign_drift, 16, 16, 10_000, seed=2, C=1.0, c=20.0, ci_z=3.0)
        assert report.upper_violations > 0
        assert report.required_C_upper > 1.0

    def test_two_dimensional(self, monotone_2d):
        report = density_check(monotone_2d, 8, 8, 10_000, seed=3, C=3.0, c=0.5)
        assert len(report.edges) == 2
        assert sum(report.counts) == 10_000

    def test_initial_point_is_rejected(self, sign_drift):
        with pytest.raises(ArgumentError, match="point mass"):
            density_check(sign_drift, 16, 0, 10_000, seed=0, C=1.0, c=1.0)

    def test_index_beyond_the_grid(self, sign_drift):
        with pytest.raises(ArgumentError):
            density_check(sign_drift, 16, 17, 10_000, seed=0, C=1.0, c=1.0)

    def test_minimum_paths(self, sign_drift):
        with pytest.raises(ArgumentError):
            density_check(sign_drift, 16, 16, 9_999, seed=0, C=1.0, c=1.0)


class TestCalibration:
    @pytest.mark.slow
    def test_calibrated_envelope_holds_on_a_fresh_seed(self, sign_drift):
        calibration = calibrate_envelope(sign_drift, 16, 16, paths=100_000, seed=0)
        assert calibration.C == pytest.approx(calibration.raw_C * 1.25)
        assert calibration.raw_C >= 1.0
        assert 0.2 <= calibration.c <= 1.0
        report = density_check(sign_drift, 16, 16, 20_000, seed=1, C=calibration.C, c=calibration.c)
        assert report.upper_violations == 0
        assert report.lower_violations == 0

    def test_margin_below_one(self, sign_drift):
        with pytest.raises(ArgumentError):
            calibrate_envelope(sign_drift, 16, 16, paths=10_000, margin=0.9)


class TestDiscontinuityIntegral:
    def test_zero_drift_gives_zero(self, brownian_problem):
        estimate = discontinuity_integral(brownian_problem, 16, 1.0, 200, seed=0)
        assert estimate.value == 0.0
        assert estimate.std_error == 0.0

    def test_sign_drift_is_positive(self, sign_drift):
        estimate = discontinuity_integral(sign_drift, 16, 1.0, 500, seed=0)
        assert estimate.value > 0
        assert estimate.paths == 500

    def test_q_below_one(self, sign_drift):
        with pytest.raises(ArgumentError):
            discontinuity_integral(sign_drift, 16, 0.5, 100, seed=0)

    def test_worker_count_does_not_change_the_result(self, sign_drift):
        single = discontinuity_integral(sign_drift, 16, 1.0, 400, seed=9, block_size=100, workers=1)
        pooled = discontinuity_integral(sign_drift, 16, 1.0, 400, seed=9, block_size=100, workers=3)
        assert single == pooled

    def test_profile_decays_like_root_n(self, sign_drift):
        profile = discontinuity_profile(sign_drift, [16, 64, 256], q=1.0, paths=2_000, seed=1)
        assert profile.n_list == [16, 64, 256]
        assert profile.spread < 2.0
        assert 1.5 < profile.ratio_64_256 < 2.7
        for earlier, later in zip(profile.estimates, profile.estimates[1:]):
            assert later.value <= earlier.value + 3 * earlier.std_error

    def test_profile_needs_step_counts(self, sign_drift):
        with pytest.raises(ArgumentError):
            discontinuity_profile(sign_drift, [])

    @pytest.mark.slow
    def test_root_n_scaling_is_two_sided(self, sign_drift):
        profile = discontinuity_profile(sign_drift, [2 ** k for k in range(4, 11)], paths=20_000, seed=0)
        assert 0 < min(profile.scaled) <= max(profile.scaled) < 2 * min(profile.scaled)

    @pytest.mark.slow
    def test_ratio_at_acceptance_scale(self, sign_drift):
        profile = discontinuity_profile(sign_drift, [64, 256], paths=100_000, seed=0)
        assert profile.ratio_64_256 == pytest.approx(2.0, rel=0.15)

    @pytest.mark.slow
    def test_higher_moment_has_the_same_order(self, sign_drift):
        first = discontinuity_profile(sign_drift, [16, 64, 256], q=1.0, paths=20_000, seed=0)
        third = discontinuity_profile(sign_drift, [16, 64, 256], q=3.0, paths=20_000, seed=0)
        ratios = [a.value / b.value for a, b in zip(third.estimates, first.estimates)]
        assert max(ratios) < 1.5 * min(ratios)


class TestKomatsu:
    def test_examples(self):
        assert komatsu_bound(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi))
        assert komatsu_bound(1.0) == pytest.approx(0.14953, abs=5e-5)
        assert ndtr(-1.0) >= komatsu_bound(1.0)

    def test_default_grid_has_no_violations(self):
        report = komatsu_check()
        assert report.points == 10_000
        assert report.total_violations == 0
        assert report.extras["min_slack"] >= 0

    def test_tail_ratio(self):
        report = komatsu_check([10.0])
        assert 1.0 < report.extras["max_ratio"] < 1.2

    def test_symmetric_in_x(self):
        np.testing.assert_array_equal(komatsu_bound([-2.0, 2.0])[0], komatsu_bound(2.0))

    def test_empty_grid(self):
        with pytest.raises(ArgumentError):
            komatsu_check([])
