"""Tests for conditionals, g.a.s. equality and the diamond factorization."""

from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from markov_machines.core.conditionals import (
    Diamond,
    conditional,
    conditionals_agree,
    diamond,
    diamond_equal,
    gas_equal,
    is_deterministic_given,
    sample_diamond,
)
from markov_machines.core.dist import Dist
from markov_machines.core.finset import FinSet
from markov_machines.core.generate import labels, random_kernel
from markov_machines.core.kernel import Kernel, marginal
from markov_machines.errors import NotDeterministic

A = FinSet.of("A", ["a"])
X = FinSet.of("X", ["x0", "x1", "x2"])
Y = FinSet.of("Y", ["y0", "y1"])
XY = FinSet.product(X, Y)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


@pytest.fixture
def joint() -> Kernel:
    return Kernel.from_rows(
        A,
        XY,
        {"a": {("x0", "y0"): F(1, 3), ("x0", "y1"): F(1, 6), ("x1", "y0"): F(1, 2)}},
    )


class TestConditional:
    """c(y|x,a) = f(x,y|a) / f•(x|a)."""

    def test_on_support(self, joint: Kernel) -> None:
        """Fibers with mass are normalised."""
        c = conditional(joint)
        assert c.row(("x0", "a")) == Dist.from_weights(Y, {"y0": F(2, 3), "y1": F(1, 3)})
        assert c.row(("x1", "a")) == Dist.point(Y, "y0")

    def test_zero_mass_fiber_is_uniform(self, joint: Kernel) -> None:
        """Fibers without mass are completed uniformly."""
        assert conditional(joint).row(("x2", "a")) == Dist.uniform(Y)

    def test_deterministic_given(self, joint: Kernel) -> None:
        """Only fibers with a single point count as deterministic."""
        assert not is_deterministic_given(joint)
        assert is_deterministic_given(diamond(joint).as_kernel())

    @given(seeds)
    @settings(max_examples=30, deadline=None)
    def test_conditionals_unique_on_support(self, seed: int) -> None:
        """Two conditionals that agree on the support are g.a.s. equal."""
        rng = np.random.default_rng(seed)
        f = random_kernel(labels("a", 2), FinSet.product(X, Y), rng, sparsity=0.4)
        c = conditional(f)
        base = marginal(f, "first")
        rows = []
        for x, a in c.source:
            rows.append(c.row((x, a)) if base(x, a) > 0 else Dist.point(Y, "y1"))
        other = Kernel(c.source, c.target, tuple(rows))
        assert conditionals_agree(c, other, base)


class TestGasEqual:
    """Equality only where the witness has mass."""

    def test_differs_off_support(self) -> None:
        """Kernels differing only off the witness support are equal."""
        b = FinSet.unit()
        source = FinSet.product(Y, b, A)
        p = Kernel.from_rows(A, Y, {"a": {"y0": 1}})
        f = Kernel.from_rows(source, X, {("y0", (), "a"): {"x0": 1}, ("y1", (), "a"): {"x0": 1}})
        g = Kernel.from_rows(source, X, {("y0", (), "a"): {"x0": 1}, ("y1", (), "a"): {"x1": 1}})
        h = Kernel.from_rows(source, X, {("y0", (), "a"): {"x2": 1}, ("y1", (), "a"): {"x0": 1}})
        assert gas_equal(f, g, p)
        assert not gas_equal(f, h, p)


class TestDiamond:
    """The exact form of f◇."""

    @given(seeds)
    @settings(max_examples=40, deadline=None)
    def test_recomposes(self, seed: int) -> None:
        """Sampling the diamond gives back the kernel exactly."""
        f = random_kernel(labels("a", 3), XY, np.random.default_rng(seed), sparsity=0.4)
        d = diamond(f)
        assert sample_diamond(d) == f
        assert is_deterministic_given(d.as_kernel())

    @given(seeds)
    @settings(max_examples=20, deadline=None)
    def test_round_trip_through_kernel(self, seed: int) -> None:
        """Reading the kernel form back gives an equal record."""
        f = random_kernel(labels("a", 2), XY, np.random.default_rng(seed), sparsity=0.3)
        d = diamond(f)
        assert diamond_equal(Diamond.from_kernel(d.as_kernel(), Y), d)

    @given(seeds)
    @settings(max_examples=100, deadline=None)
    def test_any_factorization_agrees(self, seed: int) -> None:
        """A factorization built from a conditional, with arbitrary fibers off the support,
        recomposes to f and equals diamond(f) on the support."""
        f = random_kernel(labels("a", 3), XY, np.random.default_rng(seed), sparsity=0.4)
        base = Kernel.from_function(
            f.source, X, lambda a: {x: sum((f((x, y), a) for y in Y), F(0)) for x in X}
        )
        c = conditional(f)
        filler = Dist.point(Y, "y1")
        other = Diamond(
            base,
            Y,
            tuple(
                ((a, x), c.row((x, a)) if base(x, a) > 0 else filler) for a in f.source for x in X
            ),
        )
        assert sample_diamond(other) == f
        assert is_deterministic_given(other.as_kernel())
        assert diamond_equal(other, diamond(f))

    def test_from_kernel_needs_determinism(self, joint: Kernel) -> None:
        """A kernel that splits a fiber is not a diamond."""
        fibers = FinSet.of("PY", [Dist.point(Y, "y0"), Dist.point(Y, "y1")])
        split = Kernel.from_rows(
            A,
            FinSet.product(X, fibers),
            {"a": {("x0", Dist.point(Y, "y0")): F(1, 2), ("x0", Dist.point(Y, "y1")): F(1, 2)}},
        )
        with pytest.raises(NotDeterministic):
            Diamond.from_kernel(split, Y)

    def test_diamond_values(self, joint: Kernel) -> None:
        """The fibers are the posteriors."""
        fibers = diamond(joint).fibers
        assert fibers["a", "x0"] == Dist.from_weights(Y, {"y0": F(2, 3), "y1": F(1, 3)})
        assert ("a", "x2") not in fibers
