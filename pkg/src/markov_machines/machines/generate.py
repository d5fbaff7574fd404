"""Seeded random machines for property checks and the oracle command."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from markov_machines.core.dist import Dist
from markov_machines.core.finset import FinSet, Label
from markov_machines.core.generate import labels, random_dist, random_function, random_kernel
from markov_machines.core.kernel import Kernel
from markov_machines.errors import SetMismatch
from markov_machines.machines.machine import (
    CombMachine,
    MealyMachine,
    UnifilarMachine,
    check_comb,
    comb_from_parts,
)


def machine_sets(n_inputs: int, n_outputs: int, n_states: int) -> tuple[FinSet, FinSet, FinSet]:
    return labels("i", n_inputs), labels("o", n_outputs), labels("h", n_states)


def random_mealy_machine(
    rng: np.random.Generator, n_inputs: int, n_outputs: int, n_states: int, *, sparsity: float = 0.3
) -> MealyMachine:
    inputs, outputs, states = machine_sets(n_inputs, n_outputs, n_states)
    transition = random_kernel(
        FinSet.product(inputs, states), FinSet.product(outputs, states), rng, sparsity=sparsity
    )
    return MealyMachine(inputs, outputs, states, transition)


def random_comb_machine(
    rng: np.random.Generator, n_inputs: int, n_outputs: int, n_states: int, *, sparsity: float = 0.3
) -> CombMachine:
    """Readout and stochastic update drawn independently, recombined into a comb machine."""
    inputs, outputs, states = machine_sets(n_inputs, n_outputs, n_states)
    readout = random_kernel(states, outputs, rng, sparsity=sparsity)
    update = random_kernel(
        FinSet.product(outputs, inputs, states), states, rng, sparsity=sparsity
    )
    return comb_from_parts(inputs, readout, update)


def random_unifilar_machine(
    rng: np.random.Generator, n_inputs: int, n_outputs: int, n_states: int, *, sparsity: float = 0.3
) -> UnifilarMachine:
    inputs, outputs, states = machine_sets(n_inputs, n_outputs, n_states)
    readout = random_kernel(states, outputs, rng, sparsity=sparsity)
    update = random_function(FinSet.product(outputs, inputs, states), states, rng)
    return UnifilarMachine(comb_from_parts(inputs, readout, update), update)


def random_cover(
    k: CombMachine,
    n_states: int,
    rng: np.random.Generator,
    *,
    prefix: str = "s",
    unifilar: bool = False,
) -> tuple[CombMachine, Kernel]:
    """A comb machine on ``n_states`` states with a surjective morphism onto ``k``.

    Each state is assigned a state of ``k``; the mass ``k`` sends to ``h'`` is split at
    random among the states assigned to ``h'``. With ``unifilar`` the split is a point
    mass, so the cover is unifilar whenever ``k`` is.
    """
    hidden = k.states
    if n_states < len(hidden):
        raise SetMismatch(f"{n_states} states cannot cover {len(hidden)}")
    states = labels(prefix, n_states)
    extra = rng.integers(len(hidden), size=n_states - len(hidden))
    assigned = [*hidden.elements, *(hidden.elements[int(j)] for j in extra)]
    assignment = dict(zip(states, assigned, strict=True))
    fibres = {h: FinSet.of(f"{prefix}|{h}", [s for s in states if assignment[s] == h]) for h in hidden}
    splits = {
        (i, s, h): (
            Dist.point(fibres[h], fibres[h].elements[int(rng.integers(len(fibres[h])))])
            if unifilar
            else random_dist(fibres[h], rng)
        )
        for i in k.inputs
        for s in states
        for h in hidden
    }
    source = FinSet.product(k.inputs, states)
    target = FinSet.product(k.outputs, states)
    rows = []
    for i, s in source:
        joint: dict[Label, Fraction] = {}
        for (o, h_next), p in k.transition.row((i, assignment[s])):
            for s_next, q in splits[(i, s, h_next)]:
                joint[(o, s_next)] = joint.get((o, s_next), Fraction(0)) + p * q
        rows.append(Dist.from_weights(target, joint))
    mealy = MealyMachine(k.inputs, k.outputs, states, Kernel(source, target, tuple(rows)))
    return check_comb(mealy), Kernel.deterministic(states, hidden, assignment.__getitem__)
