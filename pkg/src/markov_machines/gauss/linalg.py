"""Pseudoinverse and covariance hygiene."""

from __future__ import annotations

import logging

import numpy as np
import numpy.typing as npt

from markov_machines.errors import PSDViolation

logger = logging.getLogger(__name__)

Matrix = npt.NDArray[np.float64]

# Eigenvalues smaller than this in magnitude are rounding noise, whatever the scale.
NOISE_FLOOR = 1e-14


def pinv(m: npt.ArrayLike, rel_tol: float = 1e-12) -> Matrix:
    """Moore-Penrose pseudoinverse through the SVD.

    Singular values below ``rel_tol * σ_max`` are treated as zero.
    """
    a = np.atleast_2d(np.asarray(m, dtype=float))
    if a.size == 0:
        return np.zeros((a.shape[1], a.shape[0]))
    u, sigma, vt = np.linalg.svd(a, full_matrices=False)
    cutoff = rel_tol * (sigma.max() if sigma.size else 0.0)
    inverted = np.zeros_like(sigma)
    keep = sigma > cutoff
    inverted[keep] = 1.0 / sigma[keep]
    return (vt.T * inverted) @ u.T


def symmetrize(cov: npt.ArrayLike) -> Matrix:
    a = np.asarray(cov, dtype=float)
    return (a + a.T) / 2.0


def check_symmetric(cov: Matrix, tol: float) -> None:
    scale = max(float(np.abs(cov).max(initial=0.0)), 1.0)
    asymmetry = float(np.abs(cov - cov.T).max(initial=0.0))
    if asymmetry > tol * scale:
        raise PSDViolation(f"covariance is not symmetric (deviation {asymmetry:.3e})")


def repair_psd(cov: npt.ArrayLike, psd_tol: float = 1e-10) -> Matrix:
    """Symmetrize and clip slightly negative eigenvalues to zero.

    Raises:
        PSDViolation: If an eigenvalue is below ``-psd_tol * λ_max`` (and below the
            rounding noise floor).
    """
    sym = symmetrize(cov)
    if sym.size == 0:
        return sym
    eigenvalues, vectors = np.linalg.eigh(sym)
    smallest = float(eigenvalues.min())
    if smallest >= 0:
        return sym
    largest = max(float(eigenvalues.max()), 0.0)
    threshold = psd_tol * largest + NOISE_FLOOR
    if smallest < -threshold:
        raise PSDViolation(f"eigenvalue {smallest:.3e} is below -{threshold:.3e}")
    if smallest < -NOISE_FLOOR:
        logger.warning("clipping negative covariance eigenvalue %.3e", smallest)
    clipped = np.clip(eigenvalues, 0.0, None)
    return symmetrize((vectors * clipped) @ vectors.T)


def is_psd(cov: npt.ArrayLike, psd_tol: float = 1e-10) -> bool:
    try:
        repair_psd(cov, psd_tol)
    except PSDViolation:
        return False
    return True
