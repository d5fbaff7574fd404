"""Linear-Gaussian systems and the Kalman filter."""

from markov_machines.gauss.gaussian import (
    Gaussian,
    GaussMorphism,
    compose_gauss,
    copy_gauss,
    discard_gauss,
    identity_gauss,
    marginal_gauss,
    tensor_gauss,
)
from markov_machines.gauss.kalman import (
    FilterEquationResult,
    KalmanState,
    condition,
    kalman_filter,
    kalman_step,
    predict,
    psi,
    verify_filter_equation,
)
from markov_machines.gauss.linalg import pinv, repair_psd
from markov_machines.gauss.particle import (
    ParticleEstimate,
    particle_posterior,
    replicated_posterior,
)

__all__ = [
    "FilterEquationResult",
    "GaussMorphism",
    "Gaussian",
    "KalmanState",
    "ParticleEstimate",
    "compose_gauss",
    "condition",
    "copy_gauss",
    "discard_gauss",
    "identity_gauss",
    "kalman_filter",
    "kalman_step",
    "marginal_gauss",
    "particle_posterior",
    "pinv",
    "predict",
    "psi",
    "repair_psd",
    "replicated_posterior",
    "tensor_gauss",
    "verify_filter_equation",
]
