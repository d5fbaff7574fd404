"""Seeded random distributions and kernels with small exact denominators."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from markov_machines.core.dist import Dist
from markov_machines.core.finset import FinSet
from markov_machines.core.kernel import Kernel


def labels(prefix: str, count: int) -> FinSet:
    return FinSet.of(prefix.upper(), (f"{prefix}{k}" for k in range(count)))


def random_dist(
    carrier: FinSet,
    rng: np.random.Generator,
    *,
    max_weight: int = 4,
    sparsity: float = 0.0,
) -> Dist:
    """A random distribution whose weights are integers in ``1..max_weight`` normalised.

    Zero weights only come from ``sparsity``, the chance that an entry is forced to
    zero; at least one entry always stays positive.
    """
    raw = rng.integers(1, max_weight + 1, size=len(carrier))
    if sparsity > 0:
        raw = np.where(rng.random(len(carrier)) < sparsity, 0, raw)
    if not raw.any():
        raw[rng.integers(len(carrier))] = 1
    total = int(raw.sum())
    return Dist.from_weights(
        carrier, {label: Fraction(int(w), total) for label, w in zip(carrier, raw, strict=True)}
    )


def random_kernel(
    source: FinSet,
    target: FinSet,
    rng: np.random.Generator,
    *,
    max_weight: int = 4,
    sparsity: float = 0.0,
) -> Kernel:
    return Kernel(
        source,
        target,
        tuple(
            random_dist(target, rng, max_weight=max_weight, sparsity=sparsity) for _ in source
        ),
    )


def random_function(source: FinSet, target: FinSet, rng: np.random.Generator) -> Kernel:
    """A random deterministic kernel."""
    choices = rng.integers(len(target), size=len(source))
    picked = dict(zip(source, (target.elements[int(c)] for c in choices), strict=True))
    return Kernel.deterministic(source, target, picked.__getitem__)
