"""Labelled finite sets, the objects of the kernel category."""

from __future__ import annotations

import itertools
from collections.abc import Hashable, Iterable, Iterator
from dataclasses import dataclass, field
from functools import cached_property

from markov_machines.errors import NotAProduct, SetMismatch

Label = Hashable


@dataclass(frozen=True)
class FinSet:
    """An ordered finite set of distinct hashable labels.

    Equality looks only at ``elements``; ``name`` and ``factors`` are descriptive.
    Product sets carry their factors so coordinates can be split again, and their
    elements are tuples enumerated lexicographically in factor order.
    """

    name: str = field(compare=False)
    elements: tuple[Label, ...]
    factors: tuple[FinSet, ...] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if len(set(self.elements)) != len(self.elements):
            raise SetMismatch(f"elements of {self.name!r} are not pairwise distinct")

    @classmethod
    def of(cls, name: str, elements: Iterable[Label]) -> FinSet:
        return cls(name, tuple(elements))

    @classmethod
    def product(cls, *factors: FinSet) -> FinSet:
        """Cartesian product; zero factors give the monoidal unit ``{()}``."""
        name = "×".join(f.name for f in factors) if factors else "1"
        elements = tuple(itertools.product(*(f.elements for f in factors)))
        return cls(name, elements, factors)

    @classmethod
    def power(cls, base: FinSet, n: int) -> FinSet:
        """``base^n`` as a set of length-``n`` tuples."""
        product = cls.product(*([base] * n))
        return cls(f"{base.name}^{n}", product.elements, product.factors)

    @classmethod
    def unit(cls) -> FinSet:
        return cls.product()

    @cached_property
    def _positions(self) -> dict[Label, int]:
        return {element: position for position, element in enumerate(self.elements)}

    def index(self, element: Label) -> int:
        try:
            return self._positions[element]
        except KeyError:
            raise SetMismatch(f"{element!r} is not an element of {self.name!r}") from None

    def __contains__(self, element: object) -> bool:
        try:
            return element in self._positions
        except TypeError:
            return False

    def __iter__(self) -> Iterator[Label]:
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def is_product(self) -> bool:
        return self.factors is not None

    def factor(self, position: int) -> FinSet:
        if self.factors is None:
            raise NotAProduct(f"{self.name!r} is not a product set")
        return self.factors[position]

    def require_factors(self, count: int) -> tuple[FinSet, ...]:
        if self.factors is None or len(self.factors) != count:
            raise NotAProduct(f"{self.name!r} is not a product of {count} sets")
        return self.factors


def require_same(left: FinSet, right: FinSet, what: str) -> None:
    if left != right:
        raise SetMismatch(f"{what}: {left.name!r} does not match {right.name!r}")
