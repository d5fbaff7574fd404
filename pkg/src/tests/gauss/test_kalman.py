"""Tests for the Kalman filter and its filter equation."""

import numpy as np
import pytest

from markov_machines.config import GaussSettings
from markov_machines.errors import ShapeMismatch
from markov_machines.gauss.gaussian import Gaussian, GaussMorphism
from markov_machines.gauss.generate import random_system
from markov_machines.gauss.kalman import (
    KalmanState,
    condition,
    gain,
    kalman_filter,
    kalman_step,
    predict,
    update_morphism,
    verify_filter_equation,
)

System = tuple[GaussMorphism, KalmanState]


def random_shape_system(seed: int) -> System:
    rng = np.random.default_rng(seed)
    n, m = int(rng.integers(1, 5)), int(rng.integers(1, 4))
    return random_system(rng, n, m, singular=seed % 5 == 0)


class TestPredict:
    def test_joint_covariance(self, kalman_1d: System) -> None:
        """A persisting state observed with unit noise."""
        system, state = kalman_1d
        joint = predict(system, state)
        np.testing.assert_allclose(joint.mean, [0.0, 0.0])
        np.testing.assert_allclose(joint.cov, [[1.0, 1.0], [1.0, 2.0]])

    def test_state_dimension(self, kalman_1d: System) -> None:
        system, _ = kalman_1d
        with pytest.raises(ShapeMismatch):
            predict(system, KalmanState(np.zeros(2), np.eye(2)))


class TestStep:
    def test_one_observation(self, kalman_1d: System) -> None:
        """Observing 1 halves the variance and moves the mean halfway."""
        system, state = kalman_1d
        posterior = kalman_step(system, state, [1.0])
        np.testing.assert_allclose(posterior.hbar, [0.5])
        np.testing.assert_allclose(posterior.sigma_p, [[0.5]])

    def test_filter(self, kalman_1d: System) -> None:
        """Two observations of 1 give mean 2/3 and variance 1/3."""
        system, state = kalman_1d
        trace = kalman_filter(system, state, [[1.0], [1.0]])
        assert len(trace) == 2
        np.testing.assert_allclose(trace[-1].hbar, [2 / 3])
        np.testing.assert_allclose(trace[-1].sigma_p, [[1 / 3]])

    def test_observation_shape(self, kalman_1d: System) -> None:
        system, state = kalman_1d
        with pytest.raises(ShapeMismatch):
            kalman_step(system, state, [1.0, 2.0])

    def test_uninformative_observation(self) -> None:
        """A noiseless constant observation leaves the prediction unchanged."""
        joint = Gaussian([1.0, 3.0], [[2.0, 0.0], [0.0, 0.0]])
        np.testing.assert_allclose(gain(joint, 1), [[0.0]])
        posterior = condition(joint, [3.0], 1)
        np.testing.assert_allclose(posterior.mean, [1.0])
        np.testing.assert_allclose(posterior.cov, [[2.0]])


class TestFilterEquation:
    def test_scalar_system(self, kalman_1d: System) -> None:
        system, state = kalman_1d
        result = verify_filter_equation(system, state)
        assert result
        assert result.max_deviation < 1e-12

    @pytest.mark.parametrize("seed", range(100))
    def test_random_systems(self, seed: int) -> None:
        """Holds at 1e-9 for n <= 4, m <= 3; every fifth system has a singular observation block."""
        system, state = random_shape_system(seed)
        result = verify_filter_equation(system, state)
        assert result, result.max_deviation

    @pytest.mark.parametrize("seed", range(5))
    def test_constant_observation(self, seed: int) -> None:
        system, state = random_system(np.random.default_rng(seed), 2, 1, singular=True)
        assert verify_filter_equation(system, state)

    def test_inflated_covariance_fails(self, kalman_1d: System) -> None:
        """An update that adds variance breaks the equation."""
        system, state = kalman_1d

        def inflated(k: GaussMorphism, s: KalmanState, o: object) -> KalmanState:
            exact = kalman_step(k, s, o)
            return KalmanState(exact.hbar, exact.sigma_p + 0.01 * np.eye(exact.dim))

        result = verify_filter_equation(system, state, update=inflated)
        assert not result
        assert result.max_deviation > 1e-3

    def test_update_morphism(self, kalman_1d: System) -> None:
        """The exact update is o ↦ N(o/2, 1/2)."""
        system, state = kalman_1d
        u = update_morphism(system, state)
        np.testing.assert_allclose(u.matrix, [[0.5]])
        np.testing.assert_allclose(u.offset, [0.0])
        np.testing.assert_allclose(u.noise_cov, [[0.5]])


class TestCovarianceRecursion:
    @pytest.mark.parametrize("seed", range(20))
    def test_independent_of_observation_and_mean(self, seed: int) -> None:
        system, state = random_shape_system(seed)
        m = system.out_dim - system.in_dim
        rng = np.random.default_rng(seed + 1000)
        shifted = KalmanState(state.hbar + rng.normal(size=state.dim), state.sigma_p)
        reference = kalman_step(system, state, np.zeros(m)).sigma_p
        for start in (state, shifted):
            for o in (np.zeros(m), rng.normal(size=m), 10.0 * rng.normal(size=m)):
                np.testing.assert_allclose(
                    kalman_step(system, start, o).sigma_p, reference, rtol=1e-9, atol=1e-9
                )

    @pytest.mark.parametrize("seed", range(20))
    def test_posterior_below_prediction(self, seed: int) -> None:
        """Conditioning only removes variance from the predicted hidden block."""
        system, state = random_shape_system(seed)
        n = state.dim
        predicted = predict(system, state).cov[:n, :n]
        posterior = kalman_step(system, state, np.zeros(system.out_dim - n)).sigma_p
        eigenvalues = np.linalg.eigvalsh(predicted - posterior)
        assert eigenvalues.min() >= -1e-9 * max(1.0, float(np.abs(eigenvalues).max()))


class TestTolerances:
    def test_pinv_tolerance_reaches_condition(self) -> None:
        """A coarse cutoff drops the noisy sensor's direction from the gain."""
        joint = Gaussian([0.0, 0.0, 0.0], [[1.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 101.0]])
        exact = condition(joint, [1.0, 5.0], 1)
        coarse = condition(joint, [1.0, 5.0], 1, GaussSettings(pinv_rel_tol=0.5))
        np.testing.assert_allclose(exact.mean, [1.05 / 2.01])
        np.testing.assert_allclose(coarse.mean, [0.05], atol=0.01)

    def test_equation_tolerance(self, kalman_1d: System) -> None:
        system, state = kalman_1d

        def nudged(k: GaussMorphism, s: KalmanState, o: object) -> KalmanState:
            exact = kalman_step(k, s, o)
            return KalmanState(exact.hbar, exact.sigma_p + 1e-6 * np.eye(exact.dim))

        assert not verify_filter_equation(system, state, update=nudged)
        assert verify_filter_equation(system, state, GaussSettings(equation_tol=1e-3), update=nudged)
