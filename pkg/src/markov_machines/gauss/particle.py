"""Sequential Monte Carlo oracle for linear-Gaussian systems."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from markov_machines.config import GaussSettings
from markov_machines.errors import ConfigError, ShapeMismatch
from markov_machines.gauss.gaussian import GaussMorphism, Vector
from markov_machines.gauss.kalman import KalmanState, observation_dim
from markov_machines.gauss.linalg import Matrix, pinv, repair_psd

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ParticleEstimate:
    """Posterior mean and covariance with the standard error of the mean."""

    mean: Vector
    cov: Matrix
    stderr: Vector
    n_particles: int


def particle_posterior(
    k: GaussMorphism,
    state: KalmanState,
    observations: Sequence[npt.ArrayLike],
    n_particles: int,
    rng: np.random.Generator,
    tolerances: GaussSettings | None = None,
) -> ParticleEstimate:
    """Posterior over the hidden state after ``observations``, by particle filtering.

    Uses the optimal proposal: particles are reweighted by the predictive likelihood of
    the observation, resampled, then moved by the exact conditional of the next hidden
    state given the observation.
    """
    n, m = k.in_dim, observation_dim(k)
    if state.dim != n:
        raise ShapeMismatch(f"state has dim {state.dim}, system expects {n}")
    tolerances = GaussSettings() if tolerances is None else tolerances
    a_h, a_o = k.matrix[:n], k.matrix[n:]
    c_h, c_o = k.offset[:n], k.offset[n:]
    s_hh, s_ho, s_oo = k.noise_cov[:n, :n], k.noise_cov[:n, n:], k.noise_cov[n:, n:]
    s_oo_inv = pinv(s_oo, tolerances.pinv_rel_tol)
    gain = s_ho @ s_oo_inv
    move_cov = repair_psd(s_hh - gain @ s_ho.T, tolerances.psd_tol)

    particles = rng.multivariate_normal(
        state.hbar, state.sigma_p, size=n_particles, method="eigh", check_valid="ignore"
    )
    for step, o in enumerate(observations):
        obs = np.atleast_1d(np.asarray(o, dtype=float))
        if obs.shape != (m,):
            raise ShapeMismatch(f"observation {step} has shape {obs.shape}, expected {(m,)}")
        residual = obs - (particles @ a_o.T + c_o)
        log_w = -0.5 * np.einsum("pi,ij,pj->p", residual, s_oo_inv, residual)
        weights = np.exp(log_w - log_w.max())
        weights /= weights.sum()
        ess = 1.0 / float(np.sum(weights**2))
        logger.debug("particle step %d: effective sample size %.1f", step, ess)
        chosen = rng.choice(n_particles, size=n_particles, p=weights)
        ancestors = particles[chosen]
        residual = residual[chosen]
        means = ancestors @ a_h.T + c_h + residual @ gain.T
        noise = rng.multivariate_normal(
            np.zeros(n), move_cov, size=n_particles, method="eigh", check_valid="ignore"
        )
        particles = means + noise
    mean = particles.mean(axis=0)
    cov = np.atleast_2d(np.cov(particles, rowvar=False)) if n_particles > 1 else np.zeros((n, n))
    stderr = np.sqrt(np.clip(np.diag(cov), 0.0, None) / n_particles)
    return ParticleEstimate(mean, cov, stderr, n_particles)


def replicated_posterior(
    k: GaussMorphism,
    state: KalmanState,
    observations: Sequence[npt.ArrayLike],
    n_particles: int,
    seed: np.random.SeedSequence,
    replicates: int = 100,
    tolerances: GaussSettings | None = None,
) -> ParticleEstimate:
    """Pool ``replicates`` independent filters sharing ``n_particles`` between them.

    The single-run ``stderr`` treats particles as independent, which resampling breaks.
    Here the standard error is the spread of the replicate means, so a 3-SE band
    around the pooled mean is honest.

    Raises:
        ConfigError: If there are fewer than two replicates or fewer particles than replicates.
    """
    if replicates < 2 or n_particles < replicates:
        raise ConfigError(f"need 2 <= replicates <= n_particles, got {replicates} and {n_particles}")
    per_run = n_particles // replicates
    runs = [
        particle_posterior(k, state, observations, per_run, np.random.default_rng(child), tolerances)
        for child in seed.spawn(replicates)
    ]
    means = np.stack([run.mean for run in runs])
    covs = np.stack([run.cov for run in runs])
    stderr = means.std(axis=0, ddof=1) / np.sqrt(replicates)
    logger.debug("pooled %d replicates of %d particles", replicates, per_run)
    return ParticleEstimate(means.mean(axis=0), covs.mean(axis=0), stderr, per_run * replicates)
