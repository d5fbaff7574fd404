"""Gaussians and affine-Gaussian morphisms.

A :class:`GaussMorphism` ``R^n -> R^k`` sends ``x`` to ``N(Mx + c, Σ)``. Composition,
tensor, copy and discard follow the usual parameter algebra; degenerate (singular)
covariances are allowed everywhere.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from markov_machines.config import GaussSettings
from markov_machines.errors import ShapeMismatch
from markov_machines.gauss.linalg import Matrix, check_symmetric, repair_psd

Vector = npt.NDArray[np.float64]

# Construction-time hygiene; the Kalman functions take their own tolerances.
_HYGIENE = GaussSettings()


def _clean_cov(cov: npt.ArrayLike, dim: int, what: str) -> Matrix:
    a = np.asarray(cov, dtype=float)
    a = a.reshape(0, 0) if dim == 0 and a.size == 0 else np.atleast_2d(a)
    if a.shape != (dim, dim):
        raise ShapeMismatch(f"{what} has shape {a.shape}, expected {(dim, dim)}")
    check_symmetric(a, _HYGIENE.symmetry_tol)
    return repair_psd(a, _HYGIENE.psd_tol)


@dataclass(frozen=True, eq=False)
class Gaussian:
    mean: Vector
    cov: Matrix

    def __post_init__(self) -> None:
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        if mean.ndim != 1:
            raise ShapeMismatch(f"mean must be a vector, got shape {mean.shape}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", _clean_cov(self.cov, mean.shape[0], "covariance"))

    @property
    def dim(self) -> int:
        return int(self.mean.shape[0])

    def as_morphism(self) -> GaussMorphism:
        """The Gaussian as a morphism out of ``R^0``."""
        return GaussMorphism(np.zeros((self.dim, 0)), self.mean, self.cov)

    def marginal(self, keep: Sequence[int]) -> Gaussian:
        index = list(keep)
        return Gaussian(self.mean[index], self.cov[np.ix_(index, index)])


@dataclass(frozen=True, eq=False)
class GaussMorphism:
    matrix: Matrix
    offset: Vector
    noise_cov: Matrix

    def __post_init__(self) -> None:
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.ndim != 2:
            raise ShapeMismatch(f"matrix must be 2-dimensional, got shape {matrix.shape}")
        offset = np.asarray(self.offset, dtype=float).reshape(-1)
        if offset.shape[0] != matrix.shape[0]:
            raise ShapeMismatch(f"offset length {offset.shape[0]} != output dim {matrix.shape[0]}")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "noise_cov", _clean_cov(self.noise_cov, matrix.shape[0], "noise"))

    @property
    def in_dim(self) -> int:
        return int(self.matrix.shape[1])

    @property
    def out_dim(self) -> int:
        return int(self.matrix.shape[0])

    def as_gaussian(self) -> Gaussian:
        if self.in_dim != 0:
            raise ShapeMismatch(f"only morphisms out of R^0 are Gaussians, in_dim={self.in_dim}")
        return Gaussian(self.offset, self.noise_cov)

    def deviation(self, other: GaussMorphism) -> float:
        """Largest entry-wise difference of the parameters, relative to their scale."""
        if self.matrix.shape != other.matrix.shape:
            raise ShapeMismatch(f"{self.matrix.shape} vs {other.matrix.shape}")
        worst = 0.0
        for a, b in (
            (self.matrix, other.matrix),
            (self.offset, other.offset),
            (self.noise_cov, other.noise_cov),
        ):
            if a.size:
                scale = max(float(np.abs(a).max()), float(np.abs(b).max()), 1.0)
                worst = max(worst, float(np.abs(a - b).max()) / scale)
        return worst


def compose_gauss(f: GaussMorphism, g: GaussMorphism) -> GaussMorphism:
    """``f ⨟ g``: M = M_g·M_f, c = M_g·c_f + c_g, Σ = M_g·Σ_f·M_gᵀ + Σ_g."""
    if f.out_dim != g.in_dim:
        raise ShapeMismatch(f"cannot compose R^{f.out_dim} output with R^{g.in_dim} input")
    return GaussMorphism(
        g.matrix @ f.matrix,
        g.matrix @ f.offset + g.offset,
        g.matrix @ f.noise_cov @ g.matrix.T + g.noise_cov,
    )


def _block_diag(a: Matrix, b: Matrix) -> Matrix:
    out = np.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]))
    out[: a.shape[0], : a.shape[1]] = a
    out[a.shape[0] :, a.shape[1] :] = b
    return out


def tensor_gauss(f: GaussMorphism, g: GaussMorphism) -> GaussMorphism:
    return GaussMorphism(
        _block_diag(f.matrix, g.matrix),
        np.concatenate([f.offset, g.offset]),
        _block_diag(f.noise_cov, g.noise_cov),
    )


def identity_gauss(n: int) -> GaussMorphism:
    return GaussMorphism(np.eye(n), np.zeros(n), np.zeros((n, n)))


def copy_gauss(n: int) -> GaussMorphism:
    """``x ↦ (x, x)`` without noise."""
    return GaussMorphism(np.vstack([np.eye(n), np.eye(n)]), np.zeros(2 * n), np.zeros((2 * n, 2 * n)))


def discard_gauss(n: int) -> GaussMorphism:
    return GaussMorphism(np.zeros((0, n)), np.zeros(0), np.zeros((0, 0)))


def marginal_gauss(g: GaussMorphism, keep: Sequence[int]) -> GaussMorphism:
    """Keep the output coordinates ``keep`` (in that order)."""
    index = list(keep)
    if any(not 0 <= k < g.out_dim for k in index):
        raise ShapeMismatch(f"coordinates {index} out of range for R^{g.out_dim}")
    return GaussMorphism(g.matrix[index, :], g.offset[index], g.noise_cov[np.ix_(index, index)])
