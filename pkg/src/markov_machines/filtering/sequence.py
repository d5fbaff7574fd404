"""Filtering along observation sequences, and the brute-force posterior oracle."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

from markov_machines.core.dist import Dist
from markov_machines.core.finset import Label
from markov_machines.errors import HorizonMismatch
from markov_machines.filtering.belief import (
    Belief,
    ImpossibleObservation,
    filter_step,
    predict_output,
)
from markov_machines.machines.machine import Machine
from markov_machines.machines.run import run_joint


def _check_lengths(inputs: Sequence[Label], outputs: Sequence[Label]) -> None:
    if len(inputs) != len(outputs):
        raise HorizonMismatch(f"{len(inputs)} inputs but {len(outputs)} outputs")


def filter_sequence(
    k: Machine, b0: Belief, inputs: Sequence[Label], outputs: Sequence[Label]
) -> Belief | ImpossibleObservation:
    """Left fold of :func:`filter_step` over paired inputs and outputs."""
    _check_lengths(inputs, outputs)
    belief = b0
    for step, (i, o) in enumerate(zip(inputs, outputs, strict=True)):
        result = filter_step(k, belief, i, o, step=step)
        if isinstance(result, ImpossibleObservation):
            return result
        belief = result
    return belief


def posterior_oracle(
    k: Machine, b0: Belief, inputs: Sequence[Label], outputs: Sequence[Label]
) -> Belief | ImpossibleObservation:
    """Condition the full joint of :func:`run_joint` on the observed output tuple.

    Independent of :func:`filter_sequence`; the impossibility step is the first prefix
    of ``outputs`` that has probability zero.
    """
    _check_lengths(inputs, outputs)
    joint = run_joint(k, b0, list(inputs))
    observed = tuple(outputs)
    for step in range(len(observed)):
        prefix = observed[: step + 1]
        mass = sum((p for (_, outs), p in joint if outs[: step + 1] == prefix), Fraction(0))
        if mass == 0:
            return ImpossibleObservation(step, inputs[step], observed[step])
    final: dict[Label, Fraction] = {}
    for (s, outs), p in joint:
        if outs == observed:
            final[s] = final.get(s, Fraction(0)) + p
    posterior = Dist.normalized(k.states, final)
    assert posterior is not None
    return posterior


@dataclass(frozen=True)
class TraceStep:
    """One filtering step: what was predicted, what was seen, what is believed now."""

    step: int
    input: Label
    output: Label
    predicted: Dist
    posterior: Belief | ImpossibleObservation


def filter_trace(
    k: Machine, b0: Belief, inputs: Sequence[Label], outputs: Sequence[Label]
) -> list[TraceStep]:
    """Per-step records of :func:`filter_sequence`; stops after an impossible step."""
    _check_lengths(inputs, outputs)
    trace = []
    belief = b0
    for step, (i, o) in enumerate(zip(inputs, outputs, strict=True)):
        predicted = predict_output(k, belief, i)
        result = filter_step(k, belief, i, o, step=step)
        trace.append(TraceStep(step, i, o, predicted, result))
        if isinstance(result, ImpossibleObservation):
            break
        belief = result
    return trace
