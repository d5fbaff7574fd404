"""Seeded random linear-Gaussian systems."""

from __future__ import annotations

import numpy as np

from markov_machines.gauss.gaussian import GaussMorphism, Vector
from markov_machines.gauss.kalman import KalmanState
from markov_machines.gauss.linalg import Matrix


def random_psd(dim: int, rng: np.random.Generator, rank: int | None = None) -> Matrix:
    rank = dim if rank is None else rank
    factor = rng.normal(size=(dim, rank))
    return factor @ factor.T


def random_system(
    rng: np.random.Generator, n: int, m: int, *, singular: bool = False
) -> tuple[GaussMorphism, KalmanState]:
    """A system ``R^n -> R^(n+m)`` and a starting state.

    With ``singular`` the observation covariance of the prediction is rank-deficient:
    for ``m == 1`` the observation is a noiseless constant, otherwise the last
    observation coordinate duplicates the first.
    """
    matrix = rng.normal(size=(n + m, n))
    offset = rng.normal(size=n + m)
    factor = rng.normal(size=(n + m, n + m))
    if singular and m == 1:
        matrix[n] = 0.0
        factor[n] = 0.0
    elif singular:
        last, first = n + m - 1, n
        matrix[last] = matrix[first]
        offset[last] = offset[first]
        factor[last] = factor[first]
    state = KalmanState(rng.normal(size=n), random_psd(n, rng))
    return GaussMorphism(matrix, offset, factor @ factor.T), state


def simulate_observations(
    k: GaussMorphism, state: KalmanState, steps: int, rng: np.random.Generator
) -> list[Vector]:
    """Draw a hidden trajectory from N(h̄, Σ_p) through ``k`` and keep the observations."""
    n = k.in_dim
    hidden = rng.multivariate_normal(state.hbar, state.sigma_p, method="eigh")
    observations = []
    for _ in range(steps):
        noise = rng.multivariate_normal(np.zeros(k.out_dim), k.noise_cov, method="eigh")
        joint = k.matrix @ hidden + k.offset + noise
        hidden, o = joint[:n], joint[n:]
        observations.append(o)
    return observations
