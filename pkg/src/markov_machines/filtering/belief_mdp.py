"""The belief MDP: B(κ) with the output marginalised away."""

from __future__ import annotations

from collections.abc import Callable
from fractions import Fraction

from markov_machines.core.dist import Dist
from markov_machines.core.finset import FinSet, Label
from markov_machines.filtering.belief import Belief, build_filter
from markov_machines.machines.machine import Machine


def belief_mdp(k: Machine, *, mealy: bool = False) -> Callable[[Belief, Label], Dist]:
    """Belief transition law: with probability predict(b)(o) move to the filtered belief.

    Branches that reach the same belief are merged; the carrier of each result is the
    finite set of beliefs it reaches.

    Raises:
        NotAComb: If ``k`` fails the comb condition and ``mealy`` is false.
    """
    machine = build_filter(k, mealy=mealy)

    def transition(b: Belief, i: Label) -> Dist:
        merged: dict[Belief, Fraction] = {}
        for (_, posterior), p in machine.step(b, i).items():
            merged[posterior] = merged.get(posterior, Fraction(0)) + p
        return Dist.from_weights(FinSet.of(f"P{k.states.name}", merged), merged)

    return transition
