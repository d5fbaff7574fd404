"""Stochastic kernels between finite sets and their Markov-category structure.

A :class:`Kernel` ``f: A -> B`` stores one :class:`Dist` over ``B`` per element of ``A``;
``f(b, a)`` reads the entry f(b|a). Composition is Kleisli composition (sum over the
middle set), ``tensor`` is the monoidal product, and ``copy``/``discard``/``swap`` give
the comonoid and symmetry maps. All arithmetic is exact.
"""

from __future__ import annotations

from collections.abc import Callable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

from markov_machines.core.dist import Dist
from markov_machines.core.finset import FinSet, Label, require_same
from markov_machines.errors import SetMismatch


@dataclass(frozen=True)
class Kernel:
    """A morphism ``source -> target``: one row distribution per source element."""

    source: FinSet
    target: FinSet
    rows: tuple[Dist, ...]

    def __post_init__(self) -> None:
        if len(self.rows) != len(self.source):
            raise SetMismatch(
                f"kernel from {self.source.name!r} needs {len(self.source)} rows, "
                f"got {len(self.rows)}"
            )
        for row in self.rows:
            require_same(row.carrier, self.target, "kernel row carrier")

    @classmethod
    def from_rows(
        cls,
        source: FinSet,
        target: FinSet,
        rows: Mapping[Label, Dist | Mapping[Label, Fraction | int]],
    ) -> Kernel:
        built = []
        for a in source:
            if a not in rows:
                raise SetMismatch(f"no row given for source element {a!r}")
            row = rows[a]
            built.append(row.relabel(target) if isinstance(row, Dist) else Dist.from_weights(target, row))
        return cls(source, target, tuple(built))

    @classmethod
    def from_function(
        cls,
        source: FinSet,
        target: FinSet,
        fn: Callable[[Label], Mapping[Label, Fraction | int]],
    ) -> Kernel:
        return cls(source, target, tuple(Dist.from_weights(target, fn(a)) for a in source))

    @classmethod
    def deterministic(
        cls, source: FinSet, target: FinSet, fn: Callable[[Label], Label]
    ) -> Kernel:
        return cls(source, target, tuple(Dist.point(target, fn(a)) for a in source))

    def row(self, a: Label) -> Dist:
        return self.rows[self.source.index(a)]

    def __call__(self, b: Label, a: Label) -> Fraction:
        return self.row(a)(b)

    def items(self) -> Iterator[tuple[Label, Dist]]:
        return zip(self.source, self.rows, strict=True)

    def with_sets(self, source: FinSet, target: FinSet) -> Kernel:
        """The same entries on equal sets (used to attach product structure)."""
        require_same(source, self.source, "kernel source")
        return Kernel(source, target, tuple(row.relabel(target) for row in self.rows))


def identity(carrier: FinSet) -> Kernel:
    return Kernel.deterministic(carrier, carrier, lambda a: a)


def compose(f: Kernel, g: Kernel) -> Kernel:
    """Kleisli composite ``f ⨟ g``: (f⨟g)(c|a) = Σ_b f(b|a)·g(c|b)."""
    require_same(f.target, g.source, "compose: f.target vs g.source")
    rows = []
    for row in f.rows:
        mixed: dict[Label, Fraction] = {}
        for b, weight in row:
            for c, p in g.row(b):
                mixed[c] = mixed.get(c, Fraction(0)) + weight * p
        rows.append(Dist.from_weights(g.target, mixed))
    return Kernel(f.source, g.target, tuple(rows))


def tensor(f: Kernel, g: Kernel) -> Kernel:
    """Monoidal product: ((b,d)|(a,c)) ↦ f(b|a)·g(d|c)."""
    source = FinSet.product(f.source, g.source)
    target = FinSet.product(f.target, g.target)
    rows = []
    for a, c in source:
        left, right = f.row(a), g.row(c)
        rows.append(
            Dist.from_weights(
                target, {(b, d): p * q for b, p in left for d, q in right}
            )
        )
    return Kernel(source, target, tuple(rows))


def copy(carrier: FinSet) -> Kernel:
    return Kernel.deterministic(carrier, FinSet.product(carrier, carrier), lambda a: (a, a))


def discard(carrier: FinSet) -> Kernel:
    return Kernel.deterministic(carrier, FinSet.unit(), lambda _: ())


def swap(left: FinSet, right: FinSet) -> Kernel:
    return Kernel.deterministic(
        FinSet.product(left, right), FinSet.product(right, left), lambda ab: (ab[1], ab[0])
    )


def is_deterministic(f: Kernel) -> bool:
    return all(row.is_point_mass for row in f.rows)


def pushforward(f: Kernel, d: Dist) -> Dist:
    """Apply ``Pf`` to a distribution: (Pf)(d)(b) = Σ_a d(a)·f(b|a)."""
    require_same(d.carrier, f.source, "pushforward: distribution carrier vs kernel source")
    mixed: dict[Label, Fraction] = {}
    for a, weight in d:
        for b, p in f.row(a):
            mixed[b] = mixed.get(b, Fraction(0)) + weight * p
    return Dist.from_weights(f.target, mixed)


def state(d: Dist) -> Kernel:
    """A distribution as a kernel out of the unit ``1``."""
    return Kernel(FinSet.unit(), d.carrier, (d,))


def project(f: Kernel, keep: Sequence[int]) -> Kernel:
    """Sum out every target coordinate not listed in ``keep``.

    Keeping one coordinate yields a kernel into that factor itself; keeping several
    yields a kernel into the product of the kept factors, in the given order.
    """
    factors = f.target.require_factors(len(f.target.factors or ()))
    if len(keep) == 1:
        target = factors[keep[0]]

        def key(label: tuple[Label, ...]) -> Label:
            return label[keep[0]]

    else:
        target = FinSet.product(*(factors[i] for i in keep))

        def key(label: tuple[Label, ...]) -> Label:
            return tuple(label[i] for i in keep)

    rows = []
    for row in f.rows:
        summed: dict[Label, Fraction] = {}
        for label, p in row:
            k = key(label)
            summed[k] = summed.get(k, Fraction(0)) + p
        rows.append(Dist.from_weights(target, summed))
    return Kernel(f.source, target, tuple(rows))


def marginal(f: Kernel, side: Literal["first", "second"]) -> Kernel:
    """Marginal of ``f: A -> X×Y`` on ``X`` (``"first"``) or ``Y`` (``"second"``)."""
    f.target.require_factors(2)
    return project(f, (0,) if side == "first" else (1,))


def regroup(
    f: Kernel,
    source: Sequence[int] | None = None,
    target: Sequence[int] | None = None,
) -> Kernel:
    """Permute the coordinates of product source and/or target sets.

    ``source=(1, 0)`` turns ``A×B -> C`` into ``B×A -> C``; the permutation lists, for
    each new position, the old coordinate that goes there.
    """
    new_source = f.source
    if source is not None:
        factors = f.source.require_factors(len(source))
        new_source = FinSet.product(*(factors[i] for i in source))
    new_target = f.target
    if target is not None:
        factors = f.target.require_factors(len(target))
        new_target = FinSet.product(*(factors[i] for i in target))

    def old_source(label: tuple[Label, ...]) -> Label:
        if source is None:
            return label
        old: list[Label] = [None] * len(source)
        for new_position, old_position in enumerate(source):
            old[old_position] = label[new_position]
        return tuple(old)

    rows = []
    for a in new_source:
        row = f.row(old_source(a))
        if target is None:
            rows.append(row.relabel(new_target))
        else:
            rows.append(
                Dist.from_weights(
                    new_target, {tuple(b[i] for i in target): p for b, p in row}
                )
            )
    return Kernel(new_source, new_target, tuple(rows))
