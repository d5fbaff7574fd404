"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any


class MarkovMachinesError(Exception):
    """Base class for all library errors."""


class ConfigError(MarkovMachinesError):
    """Settings could not be loaded or validated."""


class InvalidDistribution(MarkovMachinesError):
    """Weights are negative, unknown to the carrier, or do not sum exactly to 1."""


class SetMismatch(MarkovMachinesError):
    """Two finite sets that must agree (kernel target vs. source, carriers, ...) differ."""


class NotAProduct(MarkovMachinesError):
    """An operation that splits coordinates was given a set that is not a product."""


class NotDeterministic(MarkovMachinesError):
    """A kernel that must be a point mass on every row is not."""


class NotUnifilar(MarkovMachinesError):
    """A machine's transition is not deterministic given the output."""


class NotAGenerator(MarkovMachinesError):
    """A machine with a non-trivial input set was used where a generator is required."""


class HorizonMismatch(MarkovMachinesError):
    """A horizon and the length of an input or output sequence disagree."""


class ShapeMismatch(MarkovMachinesError):
    """Matrix or vector shapes are inconsistent."""


class PSDViolation(MarkovMachinesError):
    """A covariance has a negative eigenvalue beyond the repair tolerance."""


@dataclass(frozen=True)
class CombWitness:
    """Counterexample to the comb condition: the output law at ``state`` differs between inputs."""

    state: Any
    input: Any
    other_input: Any
    output: Any

    def as_record(self) -> dict[str, str]:
        return {
            "state": str(self.state),
            "input": str(self.input),
            "other_input": str(self.other_input),
            "output": str(self.output),
        }


class NotAComb(MarkovMachinesError):
    """The output of a transition depends directly on the input."""

    def __init__(self, witness: CombWitness) -> None:
        super().__init__(
            f"output {witness.output!r} at state {witness.state!r} has different probability "
            f"under inputs {witness.input!r} and {witness.other_input!r}"
        )
        self.witness = witness


class ReadoutMismatch(MarkovMachinesError):
    """A declared readout disagrees with the output law of the transition it comes with."""

    def __init__(self, state: Any) -> None:
        super().__init__(f"declared readout disagrees with the transition at state {state!r}")
        self.state = state


class ParseError(MarkovMachinesError):
    """A machine, system or trace file could not be parsed."""

    def __init__(self, message: str, *, field: str | None = None, line: int | None = None):
        location = ""
        if line is not None:
            location += f"line {line}: "
        if field:
            location += f"{field}: "
        super().__init__(f"{location}{message}")
        self.field = field
        self.line = line
