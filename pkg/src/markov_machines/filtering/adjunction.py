"""The functor B on morphisms, the adjunction transpose, and finite pieces of B(κ).

``transpose_up`` turns a kernel ``S -> H`` into the deterministic map ``S -> PH`` that
sends each state to its row; ``transpose_down`` reads it back. A kernel is a machine
morphism ``F(S, α) -> (H, κ)`` exactly when its transpose is a unifilar morphism
``(S, α) -> B(H, κ)``, which :func:`is_filter_morphism` checks without building PH.
"""

from __future__ import annotations

import logging
from collections import deque
from collections.abc import Callable, Iterable
from dataclasses import dataclass
from fractions import Fraction

from markov_machines.config import FilteringSettings
from markov_machines.core.dist import Dist
from markov_machines.core.finset import FinSet, Label, require_same
from markov_machines.core.kernel import Kernel, is_deterministic, pushforward
from markov_machines.errors import NotDeterministic, SetMismatch
from markov_machines.filtering.belief import Belief, build_filter
from markov_machines.machines.machine import (
    AnyMachine,
    CombMachine,
    Machine,
    MealyMachine,
    UnifilarMachine,
    check_comb,
)

logger = logging.getLogger(__name__)


def b_on_morphism(f: Kernel) -> Callable[[Belief], Belief]:
    """The action ``Pf: PS -> PT`` of B on the state map of a morphism."""

    def act(b: Belief) -> Belief:
        require_same(b.carrier, f.source, "belief carrier vs morphism source")
        return pushforward(f, b)

    return act


@dataclass(frozen=True)
class TransposedMap:
    """A deterministic map from ``source`` to beliefs over ``hidden``."""

    source: FinSet
    hidden: FinSet
    beliefs: tuple[Belief, ...]

    def __post_init__(self) -> None:
        if len(self.beliefs) != len(self.source):
            raise SetMismatch("one belief per source element is required")
        for belief in self.beliefs:
            require_same(belief.carrier, self.hidden, "transposed belief carrier")

    def __call__(self, s: Label) -> Belief:
        return self.beliefs[self.source.index(s)]

    def image(self) -> FinSet:
        return FinSet.of(f"P{self.hidden.name}", dict.fromkeys(self.beliefs))

    def as_kernel(self, into: FinSet | None = None) -> Kernel:
        """The map as a deterministic kernel into a finite set of beliefs."""
        target = self.image() if into is None else into
        return Kernel.deterministic(self.source, target, self.__call__)


def transpose_up(f: Kernel) -> TransposedMap:
    """``f^□: S -> PH``, s ↦ f(·|s)."""
    return TransposedMap(f.source, f.target, f.rows)


def transpose_down(g: TransposedMap | Kernel, hidden: FinSet | None = None) -> Kernel:
    """Read a deterministic map ``S -> PH`` back as a kernel ``S -> H``.

    A deterministic :class:`Kernel` into a set of beliefs is accepted as well; its
    beliefs must be distributions over ``hidden``.
    """
    if isinstance(g, TransposedMap):
        return Kernel(g.source, g.hidden, g.beliefs)
    if not is_deterministic(g):
        raise NotDeterministic("only deterministic maps into beliefs can be transposed")
    beliefs = tuple(row.support[0] for row in g.rows)
    if not beliefs:
        if hidden is None:
            raise SetMismatch("cannot infer the hidden set of an empty map")
        return Kernel(g.source, hidden, ())
    carrier = hidden if hidden is not None else beliefs[0].carrier
    return Kernel(g.source, carrier, tuple(b.relabel(carrier) for b in beliefs))


def _machine_view(m: AnyMachine) -> Machine:
    return m.machine if isinstance(m, UnifilarMachine) else m


def is_filter_morphism(g: TransposedMap, m: AnyMachine, k: Machine, *, mealy: bool = False) -> bool:
    """Whether ``g: S -> PH`` underlies a unifilar morphism ``(S, α) -> B(H, κ)``.

    Compares, for every (i, s), the law of (o, g(s')) under α with the law of
    (o, update(g(s), i, o)) under B(κ).
    """
    source = _machine_view(m)
    require_same(g.source, source.states, "transposed map source")
    require_same(g.hidden, k.states, "transposed map hidden set")
    require_same(source.inputs, k.inputs, "inputs")
    require_same(source.outputs, k.outputs, "outputs")
    beliefs = build_filter(k, mealy=mealy)
    for i, s in source.transition.source:
        pushed: dict[tuple[Label, Belief], Fraction] = {}
        for (o, s_next), p in source.transition.row((i, s)):
            key = (o, g(s_next))
            pushed[key] = pushed.get(key, Fraction(0)) + p
        if pushed != beliefs.step(g(s), i):
            logger.debug("filter morphism square fails at input %r, state %r", i, s)
            return False
    return True


@dataclass(frozen=True)
class Truncated:
    """Enumeration stopped after ``explored`` beliefs without closing."""

    explored: int
    bound: int


@dataclass(frozen=True)
class ReachableBeliefs:
    beliefs: FinSet
    closed: bool


def reachable_beliefs(
    k: Machine,
    seeds: Iterable[Belief],
    *,
    max_beliefs: int | None = None,
    max_depth: int | None = None,
    mealy: bool = False,
) -> ReachableBeliefs | Truncated:
    """Breadth-first closure of ``seeds`` under filtering with positive-probability outputs.

    Returns :class:`Truncated` once more than ``max_beliefs`` distinct beliefs are found;
    ``max_depth`` stops the search early with ``closed=False``.
    """
    if max_beliefs is None:
        max_beliefs = FilteringSettings().max_beliefs
    machine = build_filter(k, mealy=mealy)
    found: dict[Belief, int] = {}
    queue: deque[Belief] = deque()
    for seed in seeds:
        if seed not in found:
            found[seed] = 0
            queue.append(seed)
    closed = True
    while queue:
        belief = queue.popleft()
        depth = found[belief]
        if max_depth is not None and depth >= max_depth:
            closed = False
            continue
        for i in k.inputs:
            for _, posterior in machine.step(belief, i):
                if posterior not in found:
                    found[posterior] = depth + 1
                    queue.append(posterior)
                    if len(found) > max_beliefs:
                        logger.warning(
                            "reachable beliefs truncated at %d (bound %d)", len(found), max_beliefs
                        )
                        return Truncated(len(found), max_beliefs)
    logger.debug("reachable beliefs: %d (closed=%s)", len(found), closed)
    return ReachableBeliefs(FinSet.of(f"P{k.states.name}", found), closed)


def belief_submachine(k: Machine, beliefs: FinSet, *, mealy: bool = False) -> UnifilarMachine:
    """B(κ) restricted to a set of beliefs closed under filtering.

    Raises:
        SetMismatch: If some update leaves ``beliefs``.
    """
    machine = build_filter(k, mealy=mealy)
    source = FinSet.product(k.inputs, beliefs)
    target = FinSet.product(k.outputs, beliefs)
    rows = []
    for i, b in source:
        branches = machine.step(b, i)
        for _, posterior in branches:
            if posterior not in beliefs:
                raise SetMismatch(f"belief set is not closed: {posterior} is missing")
        rows.append(Dist.from_weights(target, branches))
    mealy_machine = MealyMachine(k.inputs, k.outputs, beliefs, Kernel(source, target, tuple(rows)))
    restricted: Machine = (
        check_comb(mealy_machine) if isinstance(machine.model, CombMachine) else mealy_machine
    )
    return UnifilarMachine.from_machine(restricted)


def inclusion(beliefs: FinSet, hidden: FinSet) -> Kernel:
    """``transpose_down`` of the inclusion of a belief set into PH: b ↦ b."""
    return Kernel(beliefs, hidden, tuple(b.relabel(hidden) for b in beliefs))

