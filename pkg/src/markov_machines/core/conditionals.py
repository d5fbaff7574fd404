"""Conditionals, generalised-almost-sure equality and the diamond factorization.

The distribution object ``PY`` is infinite, so a kernel ``A -> X×PY`` is never built
over it directly: :class:`Diamond` keeps the base ``A -> X`` and one posterior fiber per
``(a, x)`` on the support, which determines the morphism up to g.a.s. equality.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction

from markov_machines.core.dist import Dist
from markov_machines.core.finset import FinSet, Label, require_same
from markov_machines.core.kernel import Kernel, marginal
from markov_machines.errors import NotDeterministic, SetMismatch


def _fibers(row: Dist) -> dict[Label, dict[Label, Fraction]]:
    grouped: dict[Label, dict[Label, Fraction]] = {}
    for (x, y), p in row:
        grouped.setdefault(x, {})[y] = p
    return grouped


def conditional(f: Kernel) -> Kernel:
    """A conditional ``c: X×A -> Y`` of ``f: A -> X×Y``.

    On the support c(y|x,a) = f(x,y|a)/f•(x|a); fibers with f•(x|a) = 0 are completed
    with the uniform distribution on ``Y``.
    """
    x_set, y_set = f.target.require_factors(2)
    source = FinSet.product(x_set, f.source)
    uniform = Dist.uniform(y_set)
    grouped = {a: _fibers(row) for a, row in f.items()}
    rows = []
    for x, a in source:
        fiber = grouped[a].get(x)
        rows.append(uniform if fiber is None else Dist.normalized(y_set, fiber) or uniform)
    return Kernel(source, y_set, tuple(rows))


def is_deterministic_given(f: Kernel) -> bool:
    """Whether ``f: A -> X×Y`` is deterministic given its first coordinate.

    True iff every fiber f(x,·|a) with f•(x|a) > 0 has a single point of support.
    """
    f.target.require_factors(2)
    return all(
        len(fiber) == 1 for row in f.rows for fiber in _fibers(row).values()
    )


def _split_witness(p: Kernel, a_set: FinSet) -> tuple[FinSet, bool]:
    if p.source == a_set:
        return a_set, False
    a_factor, _ = p.source.require_factors(2)
    require_same(a_factor, a_set, "gas_equal: witness source")
    return a_factor, True


def gas_equal(f: Kernel, g: Kernel, p: Kernel) -> bool:
    """``p``-generalised-almost-sure equality of ``f, g: X×B×A -> Y``.

    The witness ``p`` maps ``A×C -> X``; when it maps ``A -> X`` directly the extra
    input ``C`` is taken to be trivial. The kernels must agree at (x, b, a) whenever
    p(x|a, c) > 0 for some c.
    """
    require_same(f.source, g.source, "gas_equal: sources")
    require_same(f.target, g.target, "gas_equal: targets")
    x_set, _, a_set = f.source.require_factors(3)
    require_same(p.target, x_set, "gas_equal: witness target")
    _, has_extra = _split_witness(p, a_set)
    charged: set[tuple[Label, Label]] = set()
    for source, row in p.items():
        a = source[0] if has_extra else source
        for x in row.support:
            charged.add((x, a))
    return all(
        f.rows[position] == g.rows[position]
        for position, (x, _, a) in enumerate(f.source)
        if (x, a) in charged
    )


def conditionals_agree(c1: Kernel, c2: Kernel, base: Kernel) -> bool:
    """g.a.s. equality of two conditionals ``X×A -> Y`` with witness ``base: A -> X``."""
    require_same(c1.source, c2.source, "conditionals: sources")
    x_set, a_set = c1.source.require_factors(2)
    require_same(base.source, a_set, "conditionals: base source")
    require_same(base.target, x_set, "conditionals: base target")
    return all(
        c1.row((x, a)) == c2.row((x, a)) for a, row in base.items() for x in row.support
    )


@dataclass(frozen=True)
class Diamond:
    """Finite encoding of ``f◇: A -> X×PY`` restricted to its support.

    ``fibers`` maps each ``(a, x)`` with base(x|a) > 0 to the posterior over ``Y``.
    """

    base: Kernel
    fiber_set: FinSet
    fiber_items: tuple[tuple[tuple[Label, Label], Dist], ...]

    @property
    def fibers(self) -> Mapping[tuple[Label, Label], Dist]:
        return dict(self.fiber_items)

    def occurring(self) -> FinSet:
        """The finite set of fibers that actually occur, in first-seen order."""
        seen: dict[Dist, None] = {}
        for _, fiber in self.fiber_items:
            seen.setdefault(fiber, None)
        return FinSet.of(f"P{self.fiber_set.name}", seen)

    def as_kernel(self) -> Kernel:
        """The record as a kernel ``A -> X×F`` into the occurring fibers ``F``."""
        occurring = self.occurring()
        target = FinSet.product(self.base.target, occurring)
        fibers = self.fibers
        rows = []
        for a, row in self.base.items():
            rows.append(Dist.from_weights(target, {(x, fibers[a, x]): p for x, p in row}))
        return Kernel(self.base.source, target, tuple(rows))

    @classmethod
    def from_kernel(cls, k: Kernel, fiber_set: FinSet) -> Diamond:
        """Read a kernel ``A -> X×F`` with ``F`` a set of distributions as a diamond record.

        Raises:
            NotDeterministic: If the kernel is not deterministic given ``X``.
        """
        if not is_deterministic_given(k):
            raise NotDeterministic("a diamond must be deterministic given its first output")
        base = marginal(k, "first")
        items = []
        for a, row in k.items():
            for (x, fiber), _ in row:
                if not isinstance(fiber, Dist) or fiber.carrier != fiber_set:
                    raise SetMismatch(f"{fiber!r} is not a distribution over {fiber_set.name!r}")
                items.append(((a, x), fiber))
        return cls(base, fiber_set, tuple(items))


def diamond(f: Kernel) -> Diamond:
    """The unique (up to g.a.s. equality) ``f◇`` of ``f: A -> X×Y`` in exact form.

    base = f•, and for f•(x|a) > 0 the fiber is y ↦ f(x,y|a)/f•(x|a).
    """
    _, y_set = f.target.require_factors(2)
    base = marginal(f, "first")
    items = []
    for a, row in f.items():
        grouped = _fibers(row)
        for x in base.row(a).support:
            posterior = Dist.normalized(y_set, grouped[x])
            assert posterior is not None
            items.append(((a, x), posterior))
    return Diamond(base, y_set, tuple(items))


def sample_diamond(d: Diamond) -> Kernel:
    """Post-compose ``f◇`` with the sampling map, giving back a kernel ``A -> X×Y``."""
    target = FinSet.product(d.base.target, d.fiber_set)
    fibers = d.fibers
    rows = []
    for a, row in d.base.items():
        mixed: dict[Label, Fraction] = {}
        for x, p in row:
            for y, q in fibers[a, x]:
                mixed[(x, y)] = mixed.get((x, y), Fraction(0)) + p * q
        rows.append(Dist.from_weights(target, mixed))
    return Kernel(d.base.source, target, tuple(rows))


def diamond_equal(d1: Diamond, d2: Diamond) -> bool:
    """Equality of two diamond records up to g.a.s. equality with witness the base."""
    if d1.base != d2.base or d1.fiber_set != d2.fiber_set:
        return False
    left, right = d1.fibers, d2.fibers
    return all(
        left.get((a, x)) == right.get((a, x))
        for a, row in d1.base.items()
        for x in row.support
    )
