"""The Kalman filter as a deterministic update on (mean, covariance) pairs.

The system is a morphism ``κ: R^n -> R^(n+m)`` whose output is blocked as
(next hidden state, observation). A filter state (h̄, Σ_p) is interpreted as the
Gaussian N(h̄, Σ_p) over the hidden state.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from functools import partial

import numpy as np
import numpy.typing as npt

from markov_machines.config import GaussSettings
from markov_machines.errors import ShapeMismatch
from markov_machines.gauss.gaussian import (
    Gaussian,
    GaussMorphism,
    Vector,
    compose_gauss,
    copy_gauss,
    identity_gauss,
    marginal_gauss,
    tensor_gauss,
)
from markov_machines.gauss.linalg import Matrix, pinv, repair_psd

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class KalmanState:
    hbar: Vector
    sigma_p: Matrix

    def __post_init__(self) -> None:
        # Validation and PSD repair are shared with Gaussian.
        g = Gaussian(self.hbar, self.sigma_p)
        object.__setattr__(self, "hbar", g.mean)
        object.__setattr__(self, "sigma_p", g.cov)

    @property
    def dim(self) -> int:
        return int(self.hbar.shape[0])


def psi(state: KalmanState) -> Gaussian:
    return Gaussian(state.hbar, state.sigma_p)


def observation_dim(k: GaussMorphism) -> int:
    m = k.out_dim - k.in_dim
    if m < 0:
        raise ShapeMismatch(f"system R^{k.in_dim} -> R^{k.out_dim} has no observation block")
    return m


def predict(k: GaussMorphism, state: KalmanState) -> Gaussian:
    """Joint law of (next hidden state, observation): N(A·h̄ + c, A·Σ_p·Aᵀ + Σ)."""
    if state.dim != k.in_dim:
        raise ShapeMismatch(f"state has dim {state.dim}, system expects {k.in_dim}")
    return compose_gauss(psi(state).as_morphism(), k).as_gaussian()


def _blocks(joint: Gaussian, hidden_dim: int) -> tuple[Vector, Vector, Matrix, Matrix, Matrix]:
    n = hidden_dim
    if not 0 <= n <= joint.dim:
        raise ShapeMismatch(f"hidden block {n} does not fit a joint of dim {joint.dim}")
    cov = joint.cov
    return joint.mean[:n], joint.mean[n:], cov[:n, :n], cov[:n, n:], cov[n:, n:]


def gain(joint: Gaussian, hidden_dim: int, rel_tol: float | None = None) -> Matrix:
    """Σ_HO·Σ_OO⁻ with the pseudoinverse."""
    if rel_tol is None:
        rel_tol = GaussSettings().pinv_rel_tol
    _, _, _, s_ho, s_oo = _blocks(joint, hidden_dim)
    return s_ho @ pinv(s_oo, rel_tol)


def condition(
    joint: Gaussian,
    o: npt.ArrayLike,
    hidden_dim: int,
    tolerances: GaussSettings | None = None,
) -> Gaussian:
    """Posterior of the hidden block given the observation block equals ``o``.

    Uses the mean-shifted form μ_H + K(o - μ_O), which reduces to K·o at zero means.
    """
    mu_h, mu_o, s_hh, s_ho, _ = _blocks(joint, hidden_dim)
    obs = np.atleast_1d(np.asarray(o, dtype=float))
    if obs.shape != mu_o.shape:
        raise ShapeMismatch(f"observation has shape {obs.shape}, expected {mu_o.shape}")
    tolerances = GaussSettings() if tolerances is None else tolerances
    k = gain(joint, hidden_dim, tolerances.pinv_rel_tol)
    cov = repair_psd(s_hh - k @ s_ho.T, tolerances.psd_tol)
    return Gaussian(mu_h + k @ (obs - mu_o), cov)


def kalman_step(
    k: GaussMorphism,
    state: KalmanState,
    o: npt.ArrayLike,
    tolerances: GaussSettings | None = None,
) -> KalmanState:
    observation_dim(k)
    posterior = condition(predict(k, state), o, state.dim, tolerances)
    return KalmanState(posterior.mean, posterior.cov)


def kalman_filter(
    k: GaussMorphism,
    state: KalmanState,
    observations: Sequence[npt.ArrayLike],
    tolerances: GaussSettings | None = None,
) -> list[KalmanState]:
    """States after each observation (the initial state is not included)."""
    trace = []
    for o in observations:
        state = kalman_step(k, state, o, tolerances)
        trace.append(state)
    logger.debug("kalman filter ran %d steps", len(trace))
    return trace


Update = Callable[[GaussMorphism, KalmanState, npt.ArrayLike], KalmanState]


@dataclass(frozen=True)
class FilterEquationResult:
    passed: bool
    max_deviation: float

    def __bool__(self) -> bool:
        return self.passed


def update_morphism(k: GaussMorphism, state: KalmanState, update: Update = kalman_step) -> GaussMorphism:
    """The map o ↦ ψ(update(state, o)) as an affine-Gaussian morphism ``R^m -> R^n``.

    Read off from ``update`` at o = 0 and at the unit vectors, so the update must be
    affine in o with a covariance that does not depend on o.
    """
    m = observation_dim(k)
    base = update(k, state, np.zeros(m))
    columns = [update(k, state, np.eye(m)[j]).hbar - base.hbar for j in range(m)]
    matrix = np.column_stack(columns) if columns else np.zeros((state.dim, 0))
    return GaussMorphism(matrix, base.hbar, base.sigma_p)


def verify_filter_equation(
    k: GaussMorphism,
    state: KalmanState,
    tolerances: GaussSettings | None = None,
    *,
    update: Update | None = None,
) -> FilterEquationResult:
    """Check ψ⨟κ = (readout, then update-then-ψ paired with the output) as morphisms.

    Both sides are Gaussians over (hidden, observation); they are compared through
    their parameters with relative tolerance ``tolerances.equation_tol``. The default
    update is :func:`kalman_step` under the same tolerances.
    """
    tolerances = GaussSettings() if tolerances is None else tolerances
    tol = tolerances.equation_tol
    if update is None:
        update = partial(kalman_step, tolerances=tolerances)
    n, m = state.dim, observation_dim(k)
    left = compose_gauss(psi(state).as_morphism(), k)
    readout = marginal_gauss(left, range(n, n + m))
    right = compose_gauss(
        compose_gauss(readout, copy_gauss(m)),
        tensor_gauss(update_morphism(k, state, update), identity_gauss(m)),
    )
    deviation = left.deviation(right)
    if deviation > tol:
        logger.debug("filter equation deviates by %.3e", deviation)
    return FilterEquationResult(deviation <= tol, deviation)
