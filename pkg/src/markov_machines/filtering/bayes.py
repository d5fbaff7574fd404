"""Generators, Bayesian inference on parameters, and exchangeability."""

from __future__ import annotations

from collections.abc import Callable
from fractions import Fraction

from markov_machines.core.dist import Dist
from markov_machines.core.finset import FinSet, Label, require_same
from markov_machines.core.kernel import Kernel
from markov_machines.errors import NotAGenerator, SetMismatch
from markov_machines.filtering.belief import Belief, ImpossibleObservation
from markov_machines.machines.machine import CombMachine, MealyMachine, check_comb

GENERATOR_INPUT: Label = ()


def generator(f: Kernel, inputs: FinSet | None = None) -> CombMachine:
    """The generator f° of a statistical model ``f: Θ -> X``.

    The parameter is the (persistent) state and every step emits an independent draw
    from f(·|θ): κ(x, θ'|θ) = f(x|θ)·[θ' = θ]. The single input defaults to ``()``.
    """
    inputs = FinSet.unit() if inputs is None else inputs
    if len(inputs) != 1:
        raise NotAGenerator(f"a generator has one input, {inputs.name!r} has {len(inputs)}")
    source = FinSet.product(inputs, f.source)
    target = FinSet.product(f.target, f.source)
    transition = Kernel.from_function(
        source, target, lambda i_theta: {(x, i_theta[1]): p for x, p in f.row(i_theta[1])}
    )
    return check_comb(MealyMachine(inputs, f.target, f.source, transition))


def is_generator(k: CombMachine | MealyMachine) -> bool:
    """Whether ``k`` has the shape of a generator: one input and a state that never moves."""
    return len(k.inputs) == 1 and all(
        s_next == s for (_, s), row in k.transition.items() for (_, s_next), _ in row
    )


def bayes_f(f: Kernel) -> Callable[[Belief, Label], Belief | ImpossibleObservation]:
    """Bayes' rule for the model ``f``: (prior, x) ↦ posterior over the parameters."""

    def update(prior: Belief, x: Label) -> Belief | ImpossibleObservation:
        require_same(prior.carrier, f.source, "prior carrier vs model parameters")
        if x not in f.target:
            raise SetMismatch(f"{x!r} is not in the sample space {f.target.name!r}")
        posterior = Dist.normalized(
            f.source, {theta: weight * f(x, theta) for theta, weight in prior}
        )
        if posterior is None:
            return ImpossibleObservation(0, GENERATOR_INPUT, x)
        return posterior

    return update


def bayes_fold(
    f: Kernel, prior: Belief, data: list[Label]
) -> Belief | ImpossibleObservation:
    """Apply :func:`bayes_f` to each datum in turn."""
    update = bayes_f(f)
    belief = prior
    for step, x in enumerate(data):
        result = update(belief, x)
        if isinstance(result, ImpossibleObservation):
            return ImpossibleObservation(step, GENERATOR_INPUT, x)
        belief = result
    return belief


def bayes_x(prior: Dist, x: Label) -> Dist | ImpossibleObservation:
    """Inference about an unknown distribution with a finitely supported hyperprior.

    ``prior`` is a distribution whose elements are distributions over the sample space;
    each component d is reweighted by d(x) and the result renormalised.
    """
    weights: dict[Label, Fraction] = {}
    for component, weight in prior:
        if not isinstance(component, Dist):
            raise SetMismatch(f"hyperprior element {component!r} is not a distribution")
        weights[component] = weight * component(x)
    posterior = Dist.normalized(prior.carrier, weights)
    if posterior is None:
        return ImpossibleObservation(0, GENERATOR_INPUT, x)
    return posterior


def two_step_joint(k: CombMachine | MealyMachine) -> Kernel:
    """``S -> S×O×O``: state after two steps together with both outputs."""
    if len(k.inputs) != 1:
        raise NotAGenerator(f"input set {k.inputs.name!r} has {len(k.inputs)} elements")
    (i,) = k.inputs.elements
    target = FinSet.product(k.states, k.outputs, k.outputs)
    rows = []
    for s in k.states:
        joint: dict[Label, Fraction] = {}
        for (o1, s1), p in k.transition.row((i, s)):
            for (o2, s2), q in k.transition.row((i, s1)):
                joint[(s2, o1, o2)] = joint.get((s2, o1, o2), Fraction(0)) + p * q
        rows.append(Dist.from_weights(target, joint))
    return Kernel(k.states, target, tuple(rows))


def exchangeability_check(k: CombMachine | MealyMachine) -> bool:
    """Whether swapping the two outputs of a two-step run leaves the joint law unchanged.

    Raises:
        NotAGenerator: If the machine has more than one input.
    """
    joint = two_step_joint(k)
    return all(
        row((s2, o1, o2)) == row((s2, o2, o1))
        for row in joint.rows
        for s2, o1, o2 in joint.target
        if o1 != o2
    )
