"""Morphisms of machines: state maps that commute with the transitions."""

from __future__ import annotations

from collections.abc import Callable, Mapping
from dataclasses import dataclass
from fractions import Fraction

from markov_machines.core.dist import Dist
from markov_machines.core.finset import FinSet, Label, require_same
from markov_machines.core.kernel import Kernel, compose, identity, is_deterministic, tensor
from markov_machines.errors import NotDeterministic, SetMismatch
from markov_machines.machines.machine import (
    AnyMachine,
    CombMachine,
    MealyMachine,
    UnifilarMachine,
)


def _mealy(m: AnyMachine) -> MealyMachine:
    return m.machine.underlying if isinstance(m, UnifilarMachine) else m.underlying


def morphism_sides(f: Kernel, m: AnyMachine, n: AnyMachine) -> tuple[Kernel, Kernel]:
    """Both composites ``I×S -> O×T`` of the commuting square.

    Left: (id_I ⊗ f) ⨟ β. Right: α ⨟ (id_O ⊗ f).
    """
    source, target = _mealy(m), _mealy(n)
    require_same(source.inputs, target.inputs, "morphism inputs")
    require_same(source.outputs, target.outputs, "morphism outputs")
    require_same(f.source, source.states, "morphism source states")
    require_same(f.target, target.states, "morphism target states")
    left = compose(tensor(identity(source.inputs), f), target.transition)
    right = compose(source.transition, tensor(identity(source.outputs), f))
    return left, right


def is_machine_morphism(
    f: Kernel, m: AnyMachine, n: AnyMachine, *, deterministic: bool | None = None
) -> bool:
    """Whether ``f: S -> T`` is a morphism from ``m`` to ``n``.

    Morphisms between unifilar machines must also be deterministic; pass
    ``deterministic=True`` to demand it for other machines too.
    """
    if deterministic is None:
        deterministic = isinstance(m, UnifilarMachine) and isinstance(n, UnifilarMachine)
    if deterministic and not is_deterministic(f):
        return False
    left, right = morphism_sides(f, m, n)
    return left == right


def readout_commutes(f: Kernel, m: CombMachine, n: CombMachine) -> bool:
    """α• = f ⨟ β•: comb morphisms preserve the readout."""
    return m.readout == compose(f, n.readout)


@dataclass(frozen=True)
class MachineMorphism:
    """A verified morphism ``source -> target`` with underlying state map ``map``."""

    source: AnyMachine
    target: AnyMachine
    map: Kernel

    def __post_init__(self) -> None:
        if isinstance(self.source, UnifilarMachine) and isinstance(self.target, UnifilarMachine):
            if not is_deterministic(self.map):
                raise NotDeterministic("morphisms of unifilar machines must be deterministic")
        if not is_machine_morphism(self.map, self.source, self.target):
            raise SetMismatch("state map does not commute with the transitions")

    def then(self, other: MachineMorphism) -> MachineMorphism:
        if other.source is not self.target and other.source != self.target:
            raise SetMismatch("morphisms are not composable")
        return MachineMorphism(self.source, other.target, compose(self.map, other.map))


def relabel_states(
    m: CombMachine, rename: Mapping[Label, Label], name: str | None = None
) -> tuple[CombMachine, Kernel]:
    """Rename states through a bijection; returns the new machine and the renaming kernel."""
    states = FinSet.of(name or m.states.name, (rename[s] for s in m.states))
    inverse = {new: old for old, new in rename.items()}
    if len(inverse) != len(m.states):
        raise SetMismatch("state renaming is not a bijection")
    source = FinSet.product(m.inputs, states)
    target = FinSet.product(m.outputs, states)
    transition = Kernel.from_function(
        source,
        target,
        lambda i_s: {
            (o, rename[s_next]): p for (o, s_next), p in m.transition.row((i_s[0], inverse[i_s[1]]))
        },
    )
    readout = Kernel(states, m.outputs, tuple(m.readout.row(inverse[s]) for s in states))
    machine = CombMachine(MealyMachine(m.inputs, m.outputs, states, transition), readout)
    return machine, Kernel.deterministic(m.states, states, rename.__getitem__)


def quotient(
    m: CombMachine, classify: Callable[[Label], Label], name: str | None = None
) -> tuple[CombMachine, Kernel]:
    """Merge states with equal ``classify`` value, using the first state of each class.

    The returned map is a machine morphism exactly when merged states behave alike;
    callers check that with :func:`is_machine_morphism`.
    """
    representatives: dict[Label, Label] = {}
    for s in m.states:
        representatives.setdefault(classify(s), s)
    classes = FinSet.of(name or f"{m.states.name}/~", representatives)
    source = FinSet.product(m.inputs, classes)
    target = FinSet.product(m.outputs, classes)
    rows = []
    for i, c in source:
        merged: dict[Label, Fraction] = {}
        for (o, s_next), p in m.transition.row((i, representatives[c])):
            key = (o, classify(s_next))
            merged[key] = merged.get(key, Fraction(0)) + p
        rows.append(Dist.from_weights(target, merged))
    readout = Kernel(classes, m.outputs, tuple(m.readout.row(representatives[c]) for c in classes))
    machine = CombMachine(
        MealyMachine(m.inputs, m.outputs, classes, Kernel(source, target, tuple(rows))), readout
    )
    return machine, Kernel.deterministic(m.states, classes, classify)


def compose_morphisms(first: MachineMorphism, *rest: MachineMorphism) -> MachineMorphism:
    """Left-to-right composite of a chain of machine morphisms."""
    result = first
    for morphism in rest:
        result = result.then(morphism)
    return result
