"""Finitely supported distributions with exact rational weights."""

from __future__ import annotations

from collections.abc import Iterator, Mapping
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from markov_machines.core.finset import FinSet, Label
from markov_machines.core.rational import format_rat
from markov_machines.errors import InvalidDistribution, SetMismatch


@dataclass(frozen=True)
class Dist:
    """A probability distribution on ``carrier`` in canonical form.

    ``items`` lists the support in carrier order with strictly positive weights; zero
    weights are never stored, so two equal distributions are structurally equal and
    hash alike. Use :meth:`from_weights` rather than the raw constructor.
    """

    carrier: FinSet
    items: tuple[tuple[Label, Fraction], ...]

    def __post_init__(self) -> None:
        last = -1
        total = Fraction(0)
        for label, weight in self.items:
            if label not in self.carrier:
                raise InvalidDistribution(f"{label!r} is not in {self.carrier.name!r}")
            position = self.carrier.index(label)
            if position <= last:
                raise InvalidDistribution("items must follow carrier order without repeats")
            if weight <= 0:
                raise InvalidDistribution(f"non-positive weight {weight} stored for {label!r}")
            last = position
            total += weight
        if total != 1:
            raise InvalidDistribution(f"weights on {self.carrier.name!r} sum to {total}, not 1")

    @classmethod
    def from_weights(cls, carrier: FinSet, weights: Mapping[Label, Fraction | int]) -> Dist:
        for label, weight in weights.items():
            if weight < 0:
                raise InvalidDistribution(f"negative weight {weight} for {label!r}")
            if label not in carrier:
                raise InvalidDistribution(f"{label!r} is not in {carrier.name!r}")
        items = tuple(
            (label, Fraction(weights[label]))
            for label in carrier
            if label in weights and weights[label] != 0
        )
        return cls(carrier, items)

    @classmethod
    def normalized(cls, carrier: FinSet, weights: Mapping[Label, Fraction]) -> Dist | None:
        """Rescale non-negative weights to sum 1; ``None`` when they are all zero."""
        total = sum(weights.values(), Fraction(0))
        if total == 0:
            return None
        return cls.from_weights(carrier, {label: w / total for label, w in weights.items()})

    @classmethod
    def point(cls, carrier: FinSet, label: Label) -> Dist:
        return cls.from_weights(carrier, {label: 1})

    @classmethod
    def uniform(cls, carrier: FinSet) -> Dist:
        if not len(carrier):
            raise InvalidDistribution(f"no distribution exists on the empty set {carrier.name!r}")
        weight = Fraction(1, len(carrier))
        return cls.from_weights(carrier, dict.fromkeys(carrier, weight))

    @cached_property
    def _lookup(self) -> dict[Label, Fraction]:
        return dict(self.items)

    def __call__(self, label: Label) -> Fraction:
        """Probability of ``label`` (zero off the support)."""
        return self._lookup.get(label, Fraction(0))

    def __iter__(self) -> Iterator[tuple[Label, Fraction]]:
        return iter(self.items)

    @property
    def support(self) -> tuple[Label, ...]:
        return tuple(label for label, _ in self.items)

    @property
    def is_point_mass(self) -> bool:
        return len(self.items) == 1

    def weights(self) -> dict[Label, Fraction]:
        return dict(self.items)

    def vector(self) -> tuple[Fraction, ...]:
        """Dense weights in carrier order, zeros included."""
        return tuple(self(label) for label in self.carrier)

    def relabel(self, carrier: FinSet) -> Dist:
        """The same weights viewed on an equal carrier (e.g. with product factors attached)."""
        if carrier != self.carrier:
            raise SetMismatch(f"cannot move a distribution from {self.carrier.name!r} to {carrier.name!r}")
        return Dist(carrier, self.items)

    def to_record(self) -> dict[str, str]:
        return {str(label): format_rat(weight) for label, weight in self.items}

    def __str__(self) -> str:
        body = ", ".join(f"{label}: {format_rat(weight)}" for label, weight in self.items)
        return "{" + body + "}"


def flatten(outer: Dist, carrier: FinSet) -> Dist:
    """Monad multiplication: collapse a distribution over distributions on ``carrier``.

    ``outer.carrier`` must consist of :class:`Dist` values over ``carrier``.
    """
    mixed: dict[Label, Fraction] = {}
    for inner, weight in outer:
        if not isinstance(inner, Dist) or inner.carrier != carrier:
            raise SetMismatch(f"component {inner!r} is not a distribution over {carrier.name!r}")
        for label, p in inner:
            mixed[label] = mixed.get(label, Fraction(0)) + weight * p
    return Dist.from_weights(carrier, mixed)


def distributions_over(carrier: FinSet, components: Mapping[Dist, Fraction | int]) -> Dist:
    """A finitely supported distribution whose elements are distributions over ``carrier``."""
    for component in components:
        if component.carrier != carrier:
            raise SetMismatch(f"{component} is not a distribution over {carrier.name!r}")
    outer = FinSet.of(f"P{carrier.name}", components.keys())
    return Dist.from_weights(outer, components)
