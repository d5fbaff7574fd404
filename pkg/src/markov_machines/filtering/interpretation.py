"""Interpretation maps and conjugate priors.

An interpretation map ``ψ: S -> H`` says that a unifilar machine on ``S`` keeps track of
beliefs about the hidden state of ``κ``: pushing a state through ψ and then κ must equal
emitting an output from the machine, updating the state, and then applying ψ. Both
sides are only compared where the output has positive probability.
"""

from __future__ import annotations

import logging
from fractions import Fraction

from markov_machines.core.finset import FinSet, Label, require_same
from markov_machines.core.kernel import Kernel, compose, identity, tensor
from markov_machines.errors import MarkovMachinesError, SetMismatch
from markov_machines.machines.machine import (
    CombMachine,
    Machine,
    UnifilarMachine,
    output_marginal,
)

logger = logging.getLogger(__name__)


def _model_output_law(psi: Kernel, k: Machine) -> Kernel:
    """(o | i, s) ↦ Σ_h ψ(h|s)·κ•(o|i,h)."""
    return compose(tensor(identity(k.inputs), psi), output_marginal(k))


def interpretation_sides(
    psi: Kernel, m: UnifilarMachine, k: Machine
) -> tuple[Kernel, Kernel, Kernel]:
    """Left side, right side and witness of the interpretation equation, all over ``I×S``.

    Left: (id ⊗ ψ) ⨟ κ into ``O×H``. Right: o drawn from the machine's output law, then
    h drawn from ψ at the updated state. Witness: the model's output law ``I×S -> O``.
    """
    require_same(psi.source, m.states, "interpretation map source")
    require_same(psi.target, k.states, "interpretation map target")
    require_same(m.inputs, k.inputs, "inputs")
    require_same(m.outputs, k.outputs, "outputs")
    left = compose(tensor(identity(k.inputs), psi), k.transition)
    machine_outputs = output_marginal(m.machine)
    target = FinSet.product(k.outputs, k.states)
    rows = []
    for i, s in left.source:
        joint: dict[Label, Fraction] = {}
        for o, p in machine_outputs.row((i, s)):
            for s_next, q in m.update.row((o, i, s)):
                for h, r in psi.row(s_next):
                    joint[(o, h)] = joint.get((o, h), Fraction(0)) + p * q * r
        rows.append(joint)
    right = Kernel.from_rows(left.source, target, dict(zip(left.source, rows, strict=True)))
    return left, right, _model_output_law(psi, k)


def check_interpretation(
    psi: Kernel, m: UnifilarMachine, k: Machine, *, mealy: bool = False
) -> bool:
    """Whether ψ is an interpretation map from ``m`` to the model ``k``.

    Checks that the machine's readout equals ψ ⨟ κ•, then the interpretation equation
    on every (i, s, o) with positive predicted probability. With ``mealy`` the readout
    may depend on the input (the input-first wiring).
    """
    if not mealy:
        if not (m.is_comb and isinstance(k, CombMachine)):
            raise MarkovMachinesError("the comb wiring needs comb machines; pass mealy=True")
        if m.readout != compose(psi, k.readout):
            logger.debug("interpretation readout mismatch")
            return False
    left, right, witness = interpretation_sides(psi, m, k)
    if output_marginal(m.machine) != witness:
        logger.debug("interpretation output law mismatch")
        return False
    for (i, s), row in witness.items():
        for o in row.support:
            for h in k.states:
                if left((o, h), (i, s)) != right((o, h), (i, s)):
                    logger.debug("interpretation equation fails at %r", (i, s, o, h))
                    return False
    return True


def conjugate_check(psi: Kernel, f: Kernel, u: Kernel) -> bool:
    """Whether ψ: S -> Θ is a conjugate prior for the model f: Θ -> X with update u.

    ``u`` maps ``X×S0 -> S`` where ``S0`` is a subset of ``S`` (all of ``S`` in the usual
    case); the equation ψ(θ|s)·f(x|θ) = (ψ⨟f)(x|s)·Σ_s' u(s'|x,s)·ψ(θ|s') is checked for
    every s in ``S0`` and every x with (ψ⨟f)(x|s) > 0.
    """
    require_same(psi.target, f.source, "conjugate: ψ target vs model parameters")
    x_set, s0 = u.source.require_factors(2)
    require_same(x_set, f.target, "conjugate: update data set")
    require_same(u.target, psi.source, "conjugate: update target")
    for s in s0:
        if s not in psi.source:
            raise SetMismatch(f"hyperparameter {s!r} is not in {psi.source.name!r}")
    predictive = compose(psi, f)
    for s in s0:
        prior = psi.row(s)
        for x, px in predictive.row(s):
            updated: dict[Label, Fraction] = {}
            for s_next, q in u.row((x, s)):
                for theta, r in psi.row(s_next):
                    updated[theta] = updated.get(theta, Fraction(0)) + q * r
            for theta in f.source:
                if prior(theta) * f(x, theta) != px * updated.get(theta, Fraction(0)):
                    logger.debug("conjugacy fails at s=%r, x=%r, θ=%r", s, x, theta)
                    return False
    return True
