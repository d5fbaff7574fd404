"""Beliefs and the belief machine B(κ).

The state space of B(κ) is the infinite set of distributions over the hidden states,
so :class:`BeliefMachine` is lazy: readout and update are computed for the beliefs that
are actually queried, and beliefs compare structurally in canonical form.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TypeAlias

from markov_machines.core.dist import Dist
from markov_machines.core.finset import Label, require_same
from markov_machines.core.kernel import pushforward
from markov_machines.machines.machine import (
    CombMachine,
    Machine,
    MealyMachine,
    check_comb,
    output_marginal,
)

logger = logging.getLogger(__name__)

Belief: TypeAlias = Dist


@dataclass(frozen=True)
class ImpossibleObservation:
    """The observed output has probability zero under the current belief.

    ``step`` is the 0-based position in the observation sequence.
    """

    step: int
    input: Label
    output: Label

    def as_record(self) -> dict[str, str | int]:
        return {"step": self.step, "input": str(self.input), "output": str(self.output)}


def predict_output(k: Machine, b: Belief, i: Label | None = None) -> Dist:
    """Predicted output law under belief ``b``.

    For a comb machine this is the pushforward along the readout and ``i`` is ignored;
    a Mealy machine needs the input.
    """
    require_same(b.carrier, k.states, "belief carrier vs hidden states")
    if isinstance(k, CombMachine):
        return pushforward(k.readout, b)
    if i is None:
        raise ValueError("a Mealy machine predicts outputs only once the input is known")
    outputs = output_marginal(k)
    mixed: dict[Label, Fraction] = {}
    for h, weight in b:
        for o, p in outputs.row((i, h)):
            mixed[o] = mixed.get(o, Fraction(0)) + weight * p
    return Dist.from_weights(k.outputs, mixed)


def filter_step(
    k: Machine, b: Belief, i: Label, o: Label, *, step: int = 0
) -> Belief | ImpossibleObservation:
    """One Bayesian filtering update.

    b'(h') ∝ Σ_h b(h)·κ(o, h' | i, h); if the normaliser is zero the observation was
    impossible under ``b`` and :class:`ImpossibleObservation` is returned.
    """
    require_same(b.carrier, k.states, "belief carrier vs hidden states")
    unnormalized: dict[Label, Fraction] = {}
    for h, weight in b:
        for (out, h_next), p in k.transition.row((i, h)):
            if out == o:
                unnormalized[h_next] = unnormalized.get(h_next, Fraction(0)) + weight * p
    posterior = Dist.normalized(k.states, unnormalized)
    if posterior is None:
        return ImpossibleObservation(step, i, o)
    return posterior


@dataclass(frozen=True)
class BeliefMachine:
    """The unifilar machine B(κ) on beliefs, evaluated on demand.

    When ``memoize`` is set, updates are kept in a table keyed by ``(belief, i, o)``;
    inserts are idempotent so concurrent readers only ever see equal values.
    """

    model: Machine
    memoize: bool = False
    _memo: dict[tuple[Belief, Label, Label], Belief | ImpossibleObservation] = field(
        default_factory=dict, compare=False, repr=False
    )

    @property
    def is_comb(self) -> bool:
        return isinstance(self.model, CombMachine)

    def readout(self, b: Belief, i: Label | None = None) -> Dist:
        return predict_output(self.model, b, i)

    def update(self, b: Belief, i: Label, o: Label) -> Belief | ImpossibleObservation:
        if not self.memoize:
            return filter_step(self.model, b, i, o)
        key = (b, i, o)
        cached = self._memo.get(key)
        if cached is None:
            cached = filter_step(self.model, b, i, o)
            self._memo[key] = cached
        return cached

    def step(self, b: Belief, i: Label) -> dict[tuple[Label, Belief], Fraction]:
        """Transition of B(κ) at ``(i, b)``: one branch per output with positive probability."""
        branches: dict[tuple[Label, Belief], Fraction] = {}
        for o, p in self.readout(b, i):
            posterior = self.update(b, i, o)
            assert not isinstance(posterior, ImpossibleObservation)
            branches[(o, posterior)] = branches.get((o, posterior), Fraction(0)) + p
        return branches


def build_filter(k: Machine, *, mealy: bool = False, memoize: bool = False) -> BeliefMachine:
    """The belief machine of ``k``.

    Without ``mealy`` the model must satisfy the comb condition; a plain Mealy machine
    is checked and promoted.

    Raises:
        NotAComb: If ``mealy`` is false and the output depends on the input.
    """
    if not mealy and isinstance(k, MealyMachine):
        k = check_comb(k)
    return BeliefMachine(k, memoize=memoize)
