"""Mealy, comb and unifilar machines over finite sets.

A machine has a transition kernel ``I×S -> O×S``. A comb machine additionally has a
readout ``S -> O``: the output law may not depend directly on the input. A unifilar
machine's transition is deterministic given the output, so it factors into the
readout and a deterministic update ``O×I×S -> S``.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from fractions import Fraction
from typing import TypeAlias

from markov_machines.core.conditionals import conditional, gas_equal, is_deterministic_given
from markov_machines.core.dist import Dist
from markov_machines.core.finset import FinSet, Label, require_same
from markov_machines.core.kernel import Kernel, marginal
from markov_machines.errors import (
    CombWitness,
    MarkovMachinesError,
    NotAComb,
    NotUnifilar,
    ReadoutMismatch,
)


@dataclass(frozen=True)
class MealyMachine:
    """A stochastic Mealy machine: ``transition(o, s' | i, s)``."""

    inputs: FinSet
    outputs: FinSet
    states: FinSet
    transition: Kernel

    def __post_init__(self) -> None:
        source = FinSet.product(self.inputs, self.states)
        target = FinSet.product(self.outputs, self.states)
        require_same(self.transition.source, source, "transition source vs I×S")
        require_same(self.transition.target, target, "transition target vs O×S")
        object.__setattr__(self, "transition", self.transition.with_sets(source, target))

    @property
    def underlying(self) -> MealyMachine:
        return self


@dataclass(frozen=True)
class CombMachine:
    """A Mealy machine whose output law at each state is the same for every input."""

    underlying: MealyMachine
    readout: Kernel

    def __post_init__(self) -> None:
        require_same(self.readout.source, self.underlying.states, "readout source")
        require_same(self.readout.target, self.underlying.outputs, "readout target")
        witness = comb_witness(self.underlying)
        if witness is not None:
            raise NotAComb(witness)
        state = _readout_mismatch(self.underlying, self.readout)
        if state is not None:
            raise ReadoutMismatch(state)

    @property
    def inputs(self) -> FinSet:
        return self.underlying.inputs

    @property
    def outputs(self) -> FinSet:
        return self.underlying.outputs

    @property
    def states(self) -> FinSet:
        return self.underlying.states

    @property
    def transition(self) -> Kernel:
        return self.underlying.transition


Machine: TypeAlias = MealyMachine | CombMachine


def output_marginal(m: Machine) -> Kernel:
    """The output law ``I×S -> O`` obtained by discarding the next state."""
    return marginal(m.transition, "first")


def _readout_mismatch(m: MealyMachine, readout: Kernel) -> Label | None:
    """First state whose output law differs from the declared readout.

    Only meaningful once the output law is known not to depend on the input.
    """
    outputs = output_marginal(m)
    for s in m.states:
        if any(outputs.row((i, s)) != readout.row(s) for i in m.inputs):
            return s
    return None


def comb_witness(m: MealyMachine) -> CombWitness | None:
    """A state, two inputs and an output whose probability differs, or ``None``."""
    outputs = output_marginal(m)
    for s in m.states:
        rows = [(i, outputs.row((i, s))) for i in m.inputs]
        for (i, first), (j, second) in zip(rows, rows[1:], strict=False):
            if first != second:
                o = next(o for o in m.outputs if first(o) != second(o))
                return CombWitness(s, i, j, o)
    return None


def check_comb(m: MealyMachine) -> CombMachine:
    """Pair ``m`` with its derived readout if the comb condition holds exactly.

    Raises:
        NotAComb: With the witnessing ``(state, input, other_input, output)``.
    """
    witness = comb_witness(m)
    if witness is not None:
        raise NotAComb(witness)
    outputs = output_marginal(m)
    if len(m.inputs):
        first = m.inputs.elements[0]
        rows = tuple(outputs.row((first, s)) for s in m.states)
    else:
        rows = tuple(Dist.uniform(m.outputs) for _ in m.states)
    return CombMachine(m, Kernel(m.states, m.outputs, rows))


def extract_update(m: Machine) -> Kernel:
    """The canonical update map ``O×I×S -> S``.

    u(s'|o,i,s) = α(o,s'|i,s)/α•(o|i,s) where the output has positive probability and
    the uniform distribution on ``S`` elsewhere. For a comb machine α•(o|i,s) is the
    readout α•(o|s).
    """
    cond = conditional(m.transition)
    source = FinSet.product(m.outputs, m.inputs, m.states)
    rows = tuple(cond.row((o, (i, s))) for o, i, s in source)
    return Kernel(source, m.states, rows)


def recompose(m: Machine, update: Kernel) -> Kernel:
    """Rebuild ``I×S -> O×S`` from the output law of ``m`` and an update map."""
    outputs = output_marginal(m)
    rows = []
    for i, s in m.transition.source:
        joint: dict[Label, Fraction] = {}
        for o, p in outputs.row((i, s)):
            for s_next, q in update.row((o, i, s)):
                joint[(o, s_next)] = joint.get((o, s_next), Fraction(0)) + p * q
        rows.append(Dist.from_weights(m.transition.target, joint))
    return Kernel(m.transition.source, m.transition.target, tuple(rows))


def is_unifilar(m: Machine) -> bool:
    """Whether the transition is deterministic given the output, at every (i, s)."""
    return is_deterministic_given(m.transition)


def updates_agree(m: Machine, u1: Kernel, u2: Kernel) -> bool:
    """Equality of two update maps wherever the output law of ``m`` is positive."""
    if isinstance(m, CombMachine):
        return gas_equal(u1, u2, m.readout)
    outputs = output_marginal(m)
    return all(
        u1.row((o, i, s)) == u2.row((o, i, s))
        for (i, s), row in outputs.items()
        for o in row.support
    )


@dataclass(frozen=True)
class UnifilarMachine:
    """A machine whose randomness lives entirely in the output.

    ``update`` is a point mass on the support of the output law and recomposes with it
    to the transition.
    """

    machine: Machine
    update: Kernel

    def __post_init__(self) -> None:
        m = self.machine
        require_same(self.update.source, FinSet.product(m.outputs, m.inputs, m.states), "update source")
        require_same(self.update.target, m.states, "update target")
        if not is_unifilar(m):
            raise NotUnifilar("transition is not deterministic given the output")
        outputs = output_marginal(m)
        for (i, s), row in outputs.items():
            for o in row.support:
                if not self.update.row((o, i, s)).is_point_mass:
                    raise NotUnifilar(f"update at {(o, i, s)!r} is not a point mass")
        if recompose(m, self.update) != m.transition:
            raise NotUnifilar("update does not recompose to the transition")

    @classmethod
    def from_machine(cls, m: Machine) -> UnifilarMachine:
        return cls(m, extract_update(m))

    @property
    def is_comb(self) -> bool:
        return isinstance(self.machine, CombMachine)

    @property
    def inputs(self) -> FinSet:
        return self.machine.inputs

    @property
    def outputs(self) -> FinSet:
        return self.machine.outputs

    @property
    def states(self) -> FinSet:
        return self.machine.states

    @property
    def transition(self) -> Kernel:
        return self.machine.transition

    @property
    def readout(self) -> Kernel:
        if not isinstance(self.machine, CombMachine):
            raise MarkovMachinesError("a unifilar Mealy machine has no input-free readout")
        return self.machine.readout

    def next_state(self, o: Label, i: Label, s: Label) -> Label:
        return self.update.row((o, i, s)).support[0]


AnyMachine: TypeAlias = MealyMachine | CombMachine | UnifilarMachine


def comb_from_parts(
    inputs: FinSet, readout: Kernel, update: Kernel
) -> CombMachine:
    """Build α(o,s'|i,s) = readout(o|s)·update(s'|o,i,s) as a comb machine."""
    states, outputs = readout.source, readout.target
    source = FinSet.product(inputs, states)
    target = FinSet.product(outputs, states)
    rows = []
    for i, s in source:
        joint: dict[Label, Fraction] = {}
        for o, p in readout.row(s):
            for s_next, q in update.row((o, i, s)):
                joint[(o, s_next)] = joint.get((o, s_next), Fraction(0)) + p * q
        rows.append(Dist.from_weights(target, joint))
    return CombMachine(MealyMachine(inputs, outputs, states, Kernel(source, target, tuple(rows))), readout)


def moore_machine(
    inputs: FinSet,
    outputs: FinSet,
    states: FinSet,
    emit: Callable[[Label], Label],
    step: Callable[[Label, Label], Label],
) -> CombMachine:
    """A deterministic comb machine: output ``emit(s)``, next state ``step(i, s)``."""
    readout = Kernel.deterministic(states, outputs, emit)
    update = Kernel.deterministic(
        FinSet.product(outputs, inputs, states), states, lambda ois: step(ois[1], ois[2])
    )
    return comb_from_parts(inputs, readout, update)
