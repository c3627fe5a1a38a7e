"""Tests for the Euler-Maruyama variants, continuous interpolation and deviation statistics."""
import numpy as np
import pytest

from src.data.models import SchemeKind, StoppingTimeSpec
from src.errors import ArgumentError
from src.tools.brownian import coarsen, generate, generate_batch
from src.tools.catalog import preset
from src.tools.em_scheme import (
    continuous_states, deviation_stats, eta, first_exit_index, increment_moment, simulate,
)


class TestEta:
    def test_grid_points(self):
        assert eta(4, 1.0, 0.3) == 0.25
        assert eta(4, 1.0, 0.25) == 0.25
        assert eta(4, 1.0, 0.0) == 0.0
        assert eta(4, 1.0, 1.0) == 1.0

    def test_non_unit_horizon(self):
        assert eta(8, 2.0, 0.75) == 0.75
        assert eta(8, 2.0, 0.7) == 0.5
        assert eta(10, 2.0, 1.99) == 1.8
        assert eta(3, 0.3, 0.2) == pytest.approx(0.2)

    def test_out_of_range(self):
        with pytest.raises(ArgumentError):
            eta(4, 1.0, 1.5)
        with pytest.raises(ArgumentError):
            eta(0, 1.0, 0.5)


class TestSimulate:
    def test_brownian_problem_reproduces_the_path(self, brownian_problem, small_batch):
        path = simulate(brownian_problem, SchemeKind.STANDARD, 256, small_batch)
        np.testing.assert_allclose(path.states, small_batch.values(), atol=1e-12)
        assert path.times[-1] == 1.0

    def test_one_step_by_hand(self, sign_drift):
        w = generate(1, 1, 1.0, 11, 0)
        path = simulate(sign_drift, SchemeKind.STANDARD, 2, w)
        dw = w.increments[:, 0]
        x1 = 0.0 + 0.5 * 1.0 + dw[0]
        x2 = x1 + 0.5 * (1.0 if x1 <= 0 else -1.0) + dw[1]
        np.testing.assert_allclose(path.states[:, 0], [0.0, x1, x2])

    def test_schemes_coincide_for_time_homogeneous_coefficients(self, sign_drift, small_batch):
        w = coarsen(small_batch, 5)
        paths = [simulate(sign_drift, scheme, 32, w).states for scheme in SchemeKind]
        assert np.array_equal(paths[0], paths[1])
        assert np.array_equal(paths[0], paths[2])

    def test_schemes_differ_when_the_drift_switches_inside_a_step(self):
        p = preset("regime_switch")
        w = coarsen(generate(1, 4, 1.0, 0, 0), 0)
        standard = simulate(p, SchemeKind.STANDARD, 1, w).terminal[0]
        polygonal = simulate(p, SchemeKind.POLYGONAL, 1, w).terminal[0]
        mixed = simulate(p, SchemeKind.MIXED, 1, w).terminal[0]
        # drift 1 at t = 0, 2 at the midpoint; x0 = 0 sits on the positive-drift side
        assert polygonal - standard == pytest.approx(1.0)
        assert mixed == polygonal

    def test_two_dimensional(self, monotone_2d):
        w = generate_batch(2, 6, 1.0, 0, range(3))
        path = simulate(monotone_2d, SchemeKind.STANDARD, 64, w)
        assert path.states.shape == (3, 65, 2)
        assert np.all(np.isfinite(path.states))

    def test_step_count_must_match_the_path(self, sign_drift, small_batch):
        with pytest.raises(ArgumentError, match="coarsen"):
            simulate(sign_drift, SchemeKind.STANDARD, 16, small_batch)

    def test_dimension_must_match(self, monotone_2d, small_batch):
        with pytest.raises(ArgumentError):
            simulate(monotone_2d, SchemeKind.STANDARD, 256, small_batch)

    def test_step_count_power_of_two(self, sign_drift):
        with pytest.raises(ArgumentError):
            simulate(sign_drift, SchemeKind.STANDARD, 3, generate(1, 2, 1.0, 0, 0))


class TestContinuousStates:
    def test_agrees_with_the_scheme_on_its_grid(self, sign_drift, small_batch):
        coarse = simulate(sign_drift, SchemeKind.STANDARD, 16, coarsen(small_batch, 4))
        states = continuous_states(coarse, small_batch)
        assert states.shape == (64, 257, 1)
        np.testing.assert_allclose(states[:, ::16, :], coarse.states, atol=1e-12)

    def test_off_grid_value_by_hand(self, sign_drift, small_batch):
        coarse = simulate(sign_drift, SchemeKind.STANDARD, 16, coarsen(small_batch, 4))
        states = continuous_states(coarse, small_batch)
        w = small_batch.values()
        # t = 3/256 lies in the first coarse step
        x0 = coarse.states[:, 0, 0]
        expected = x0 + (3 / 256) * np.where(x0 <= 0, 1.0, -1.0) + w[:, 3, 0]
        np.testing.assert_allclose(states[:, 3, 0], expected, atol=1e-12)

    def test_brownian_interpolation_is_the_fine_path(self, brownian_problem, small_batch):
        coarse = simulate(brownian_problem, SchemeKind.STANDARD, 8, coarsen(small_batch, 3))
        np.testing.assert_allclose(continuous_states(coarse, small_batch), small_batch.values(), atol=1e-12)

    def test_same_level_returns_the_states(self, sign_drift, small_batch):
        path = simulate(sign_drift, SchemeKind.STANDARD, 256, small_batch)
        np.testing.assert_array_equal(continuous_states(path, small_batch), path.states)

    def test_coarser_path_rejected(self, sign_drift, small_batch):
        path = simulate(sign_drift, SchemeKind.STANDARD, 256, small_batch)
        with pytest.raises(ArgumentError):
            continuous_states(path, coarsen(small_batch, 4))


class TestDeviationStats:
    def test_zero_deviation_against_itself(self, sign_drift, small_batch):
        path = simulate(sign_drift, SchemeKind.STANDARD, 256, small_batch)
        sample = deviation_stats(path, path, 2.0, [StoppingTimeSpec.horizon()])
        assert np.all(sample.sup_p == 0)
        assert np.all(sample.tau_abs == 0)

    def test_columns(self, sign_drift, small_batch):
        fine = simulate(sign_drift, SchemeKind.STANDARD, 256, small_batch)
        coarse = simulate(sign_drift, SchemeKind.STANDARD, 16, coarsen(small_batch, 4))
        taus = [StoppingTimeSpec.horizon(), StoppingTimeSpec.deterministic(0.5),
                StoppingTimeSpec.first_exit(0.5)]
        sample = deviation_stats(fine, coarse, 1.0, taus)
        assert sample.tau_abs.shape == (64, 3)
        np.testing.assert_allclose(sample.tau_abs[:, 0], sample.terminal_p)
        assert np.all(sample.sup_p >= sample.tau_abs.max(axis=1) - 1e-15)

    def test_p_exponent_range(self, sign_drift, small_batch):
        path = simulate(sign_drift, SchemeKind.STANDARD, 256, small_batch)
        with pytest.raises(ArgumentError):
            deviation_stats(path, path, 0.5, [StoppingTimeSpec.horizon()])
        with pytest.raises(ArgumentError):
            deviation_stats(path, path, 9.0, [StoppingTimeSpec.horizon()])

    def test_different_brownian_paths_rejected(self, sign_drift, small_batch):
        fine = simulate(sign_drift, SchemeKind.STANDARD, 256, small_batch)
        other = coarsen(generate_batch(1, 8, 1.0, 999, range(64)), 4)
        coarse = simulate(sign_drift, SchemeKind.STANDARD, 16, other)
        with pytest.raises(ArgumentError, match="same Brownian path"):
            deviation_stats(fine, coarse, 1.0, [StoppingTimeSpec.horizon()])


class TestFirstExitIndex:
    def test_hit_and_miss(self):
        states = np.array([
            [[0.0], [0.5], [1.2], [0.1]],
            [[0.0], [0.2], [0.3], [0.4]],
        ])
        np.testing.assert_array_equal(first_exit_index(states, 1.0), [2, 3])


class TestIncrementMoment:
    def test_brownian_second_moment(self, brownian_problem):
        estimate = increment_moment(brownian_problem, 16, 2.0, 4_000, seed=1)
        # |W_t - W_eta(t)|^2 at a midpoint has mean T / (2n)
        assert estimate.value == pytest.approx(1 / 32, abs=6 * estimate.std_error)
        assert 0 < estimate.time < 1
        assert float(estimate) == estimate.value

    def test_worker_count_does_not_change_the_result(self, sign_drift):
        single = increment_moment(sign_drift, 16, 2.0, 600, seed=3, block_size=128, workers=1)
        pooled = increment_moment(sign_drift, 16, 2.0, 600, seed=3, block_size=128, workers=2)
        assert single == pooled

    def test_invalid_q(self, sign_drift):
        with pytest.raises(ArgumentError):
            increment_moment(sign_drift, 16, 0.0, 100, seed=0)

    @pytest.mark.slow
    def test_decay_like_n_to_the_minus_q_over_two(self, sign_drift):
        coarse = increment_moment(sign_drift, 64, 2.0, 100_000, seed=5)
        fine = increment_moment(sign_drift, 256, 2.0, 100_000, seed=5)
        assert coarse.value / fine.value == pytest.approx(4.0, rel=0.1)
