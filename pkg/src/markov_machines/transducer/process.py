"""Finite-horizon controlled stochastic processes.

Level ``n`` (1-based, up to the horizon) maps each tuple of ``n - 1`` inputs to a
distribution over ``n``-tuples of outputs. The first output is emitted before any input
is received; output ``k`` may only depend on the inputs before it.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from types import MappingProxyType

from markov_machines.core.dist import Dist
from markov_machines.core.finset import FinSet, Label, require_same
from markov_machines.errors import HorizonMismatch, InvalidDistribution, SetMismatch
from markov_machines.filtering.belief import Belief, ImpossibleObservation
from markov_machines.machines.machine import CombMachine
from markov_machines.machines.run import run_joint

logger = logging.getLogger(__name__)

InputTuple = tuple[Label, ...]


@dataclass(frozen=True)
class ControlledProcess:
    inputs: FinSet
    outputs: FinSet
    horizon: int
    levels: tuple[Mapping[InputTuple, Dist], ...]

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise HorizonMismatch(f"horizon must be at least 1, got {self.horizon}")
        if len(self.levels) != self.horizon:
            raise HorizonMismatch(f"{len(self.levels)} levels for horizon {self.horizon}")
        for n, level in enumerate(self.levels, start=1):
            carrier = self.output_set(n)
            keys = set(input_tuples(self.inputs, n - 1))
            if set(level) != keys:
                raise SetMismatch(f"level {n} must be keyed by every {n - 1}-tuple of inputs")
            for dist in level.values():
                require_same(dist.carrier, carrier, f"level {n} output carrier")
        frozen = tuple(MappingProxyType(dict(level)) for level in self.levels)
        object.__setattr__(self, "levels", frozen)

    def __hash__(self) -> int:
        canonical = tuple(
            tuple(level[inputs] for inputs in input_tuples(self.inputs, n))
            for n, level in enumerate(self.levels)
        )
        return hash((self.inputs, self.outputs, self.horizon, canonical))

    def output_set(self, n: int) -> FinSet:
        return FinSet.power(self.outputs, n)

    def level(self, n: int) -> Mapping[InputTuple, Dist]:
        if not 1 <= n <= self.horizon:
            raise HorizonMismatch(f"level {n} outside 1..{self.horizon}")
        return self.levels[n - 1]

    def __call__(self, outputs: Sequence[Label], inputs: Sequence[Label] = ()) -> Fraction:
        """p_n(outputs | inputs) with n = len(outputs)."""
        return self.level(len(outputs))[tuple(inputs)](tuple(outputs))


def input_tuples(inputs: FinSet, length: int) -> list[InputTuple]:
    return list(product(inputs.elements, repeat=length))


def unroll(m: CombMachine, s0: Belief, horizon: int) -> ControlledProcess:
    """The behaviour of ``m`` from belief ``s0``, truncated at ``horizon`` outputs.

    p_n runs the first ``n - 1`` inputs through the transition, then reads one more
    output off the final state.
    """
    if horizon < 1:
        raise HorizonMismatch(f"horizon must be at least 1, got {horizon}")
    require_same(s0.carrier, m.states, "unroll initial belief")
    levels = []
    for n in range(1, horizon + 1):
        carrier = FinSet.power(m.outputs, n)
        level: dict[InputTuple, Dist] = {}
        for inputs in input_tuples(m.inputs, n - 1):
            weights: dict[Label, Fraction] = {}
            for (s, outs), p in run_joint(m, s0, inputs):
                for o, q in m.readout.row(s):
                    key = (*outs, o)
                    weights[key] = weights.get(key, Fraction(0)) + p * q
            level[inputs] = Dist.from_weights(carrier, weights)
        logger.debug("unroll level %d: %d input tuples", n, len(level))
        levels.append(level)
    return ControlledProcess(m.inputs, m.outputs, horizon, tuple(levels))


def causality_witness(p: ControlledProcess) -> tuple[int, InputTuple, InputTuple] | None:
    """First ``(n, inputs, output_prefix)`` where p_n disagrees with p_{n-1}, if any."""
    for n in range(2, p.horizon + 1):
        shorter = p.level(n - 1)
        for inputs, dist in p.level(n).items():
            prefix_law: dict[InputTuple, Fraction] = {}
            for outs, q in dist:
                prefix_law[outs[:-1]] = prefix_law.get(outs[:-1], Fraction(0)) + q
            expected = shorter[inputs[:-1]]
            for outs in p.output_set(n - 1):
                if prefix_law.get(outs, Fraction(0)) != expected(outs):
                    return n, inputs, outs
    return None


def check_causality(p: ControlledProcess) -> bool:
    witness = causality_witness(p)
    if witness is not None:
        logger.debug("causality fails at level %d, inputs %r, outputs %r", *witness)
    return witness is None


def process_update(
    p: ControlledProcess, i: Label, o: Label
) -> ControlledProcess | ImpossibleObservation:
    """Condition on having received input ``i`` and emitted output ``o`` first.

    p'_n(o_1..o_n | i_2..i_n) = p_{n+1}(o, o_1..o_n | i, i_2..i_n) / p_1(o).
    """
    if p.horizon < 2:
        raise HorizonMismatch("conditioning needs a horizon of at least 2")
    if i not in p.inputs or o not in p.outputs:
        raise SetMismatch(f"({i!r}, {o!r}) is not an input/output pair of the process")
    first = p((o,))
    if first == 0:
        return ImpossibleObservation(0, i, o)
    levels = []
    for n in range(1, p.horizon):
        carrier = p.output_set(n)
        level: dict[InputTuple, Dist] = {}
        for inputs in input_tuples(p.inputs, n - 1):
            longer = p.level(n + 1)[(i, *inputs)]
            weights = {outs[1:]: q / first for outs, q in longer if outs[0] == o}
            try:
                level[inputs] = Dist.from_weights(carrier, weights)
            except InvalidDistribution as exc:
                raise InvalidDistribution(
                    f"process is not causal at level {n + 1}, inputs {(i, *inputs)!r}"
                ) from exc
        levels.append(level)
    return ControlledProcess(p.inputs, p.outputs, p.horizon - 1, tuple(levels))


def behaviour_equal(
    m1: CombMachine, b1: Belief, m2: CombMachine, b2: Belief, horizon: int
) -> bool:
    """Whether two machines started in the given beliefs unroll to the same process."""
    require_same(m1.inputs, m2.inputs, "inputs")
    require_same(m1.outputs, m2.outputs, "outputs")
    return unroll(m1, b1, horizon) == unroll(m2, b2, horizon)


def mix_processes(components: Sequence[tuple[Fraction, ControlledProcess]]) -> ControlledProcess:
    """Finite-support mixture Σ_k w_k·p_k, level by level and input tuple by input tuple."""
    if not components:
        raise SetMismatch("a mixture needs at least one component")
    total = sum((w for w, _ in components), Fraction(0))
    if total != 1 or any(w < 0 for w, _ in components):
        raise InvalidDistribution(f"mixture weights must be nonnegative and sum to 1, got {total}")
    _, head = components[0]
    for _, process in components[1:]:
        require_same(process.inputs, head.inputs, "mixture inputs")
        require_same(process.outputs, head.outputs, "mixture outputs")
        if process.horizon != head.horizon:
            raise HorizonMismatch("mixture components have different horizons")
    levels = []
    for n in range(1, head.horizon + 1):
        level: dict[InputTuple, Dist] = {}
        for inputs in input_tuples(head.inputs, n - 1):
            weights: dict[Label, Fraction] = {}
            for w, process in components:
                for outs, q in process.level(n)[inputs]:
                    weights[outs] = weights.get(outs, Fraction(0)) + w * q
            level[inputs] = Dist.from_weights(head.output_set(n), weights)
        levels.append(level)
    return ControlledProcess(head.inputs, head.outputs, head.horizon, tuple(levels))
