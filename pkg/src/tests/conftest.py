"""Shared machines and systems."""

from __future__ import annotations

from fractions import Fraction as F

import numpy as np
import pytest

from markov_machines.core.finset import FinSet
from markov_machines.core.kernel import Kernel
from markov_machines.gauss.gaussian import GaussMorphism
from markov_machines.gauss.kalman import KalmanState
from markov_machines.machines.machine import (
    CombMachine,
    MealyMachine,
    comb_from_parts,
    moore_machine,
)

HIDDEN = FinSet.of("H", ["a", "b"])
BITS = FinSet.of("O", [0, 1])
UNIT = FinSet.unit()


def persist_state_machine() -> CombMachine:
    """Hidden state never changes; emits 0 w.p. 3/4 in ``a`` and 1/4 in ``b``."""
    readout = Kernel.from_rows(
        HIDDEN, BITS, {"a": {0: F(3, 4), 1: F(1, 4)}, "b": {0: F(1, 4), 1: F(3, 4)}}
    )
    update = Kernel.deterministic(FinSet.product(BITS, UNIT, HIDDEN), HIDDEN, lambda ois: ois[2])
    return comb_from_parts(UNIT, readout, update)


def alternating_machine() -> CombMachine:
    """Deterministic: ``a`` emits 0 and moves to ``b``, ``b`` emits 1 and moves to ``a``."""
    return moore_machine(
        UNIT,
        BITS,
        HIDDEN,
        {"a": 0, "b": 1}.__getitem__,
        lambda _i, s: "b" if s == "a" else "a",
    )


def echo_machine() -> MealyMachine:
    """Single state, output equals input: a Mealy machine that is not a comb."""
    states = FinSet.of("S", ["s"])
    transition = Kernel.deterministic(
        FinSet.product(BITS, states), FinSet.product(BITS, states), lambda i_s: (i_s[0], "s")
    )
    return MealyMachine(BITS, BITS, states, transition)


@pytest.fixture
def persist_state() -> CombMachine:
    return persist_state_machine()


@pytest.fixture
def alternating() -> CombMachine:
    return alternating_machine()


@pytest.fixture
def echo() -> MealyMachine:
    return echo_machine()


@pytest.fixture
def bernoulli() -> Kernel:
    """Two coins: ``t1`` lands heads w.p. 3/4, ``t2`` w.p. 1/4."""
    thetas = FinSet.of("Θ", ["t1", "t2"])
    sides = FinSet.of("X", ["heads", "tails"])
    return Kernel.from_rows(
        thetas,
        sides,
        {"t1": {"heads": F(3, 4), "tails": F(1, 4)}, "t2": {"heads": F(1, 4), "tails": F(3, 4)}},
    )


@pytest.fixture
def kalman_1d() -> tuple[GaussMorphism, KalmanState]:
    """Hidden state persists; observation = state + unit noise; prior N(0, 1)."""
    system = GaussMorphism(
        np.array([[1.0], [1.0]]), np.zeros(2), np.array([[0.0, 0.0], [0.0, 1.0]])
    )
    return system, KalmanState(np.zeros(1), np.eye(1))


def with_twin_state(m: CombMachine) -> CombMachine:
    """Copy of a persistent two-state machine with a state ``a2`` that behaves like ``a``."""
    states = FinSet.of("H3", ["a", "a2", "b"])
    readout = Kernel.from_rows(
        states, m.outputs, {s: m.readout.row("a" if s == "a2" else s) for s in states}
    )
    update = Kernel.deterministic(
        FinSet.product(m.outputs, m.inputs, states), states, lambda ois: ois[2]
    )
    return comb_from_parts(m.inputs, readout, update)
