"""Chaining a machine's transition over a finite input sequence."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from fractions import Fraction

from markov_machines.core.dist import Dist
from markov_machines.core.finset import FinSet, Label, require_same
from markov_machines.errors import HorizonMismatch
from markov_machines.machines.machine import AnyMachine

logger = logging.getLogger(__name__)


def joint_carrier(m: AnyMachine, n: int) -> FinSet:
    """``S × O^n``: final state paired with the tuple of the first ``n`` outputs."""
    return FinSet.product(m.states, FinSet.power(m.outputs, n))


def run_joint(m: AnyMachine, prior: Dist, inputs: Sequence[Label], n: int | None = None) -> Dist:
    """Exact joint law of the final state and all outputs after ``n`` transitions.

    Output ``k`` (0-based) is emitted by the transition that consumes ``inputs[k]``.
    With ``n == 0`` the result is the prior paired with the empty output tuple.

    Raises:
        HorizonMismatch: If ``len(inputs) != n``.
    """
    n = len(inputs) if n is None else n
    if len(inputs) != n:
        raise HorizonMismatch(f"{len(inputs)} inputs given for horizon {n}")
    require_same(prior.carrier, m.states, "run_joint prior")
    joint: dict[tuple[Label, tuple[Label, ...]], Fraction] = {(s, ()): p for s, p in prior}
    for i in inputs:
        stepped: dict[tuple[Label, tuple[Label, ...]], Fraction] = {}
        for (s, outs), p in joint.items():
            for (o, s_next), q in m.transition.row((i, s)):
                key = (s_next, (*outs, o))
                stepped[key] = stepped.get(key, Fraction(0)) + p * q
        joint = stepped
    logger.debug("run_joint horizon %d: %d support points", n, len(joint))
    return Dist.from_weights(joint_carrier(m, n), joint)
