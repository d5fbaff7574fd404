"""Level-ordered records for controlled processes."""

from __future__ import annotations

from collections.abc import Iterable
from fractions import Fraction

from pydantic import BaseModel, ConfigDict, Field

from markov_machines.core.dist import Dist
from markov_machines.core.finset import FinSet, Label
from markov_machines.core.rational import format_rat, parse_rat
from markov_machines.errors import ParseError
from markov_machines.transducer.process import ControlledProcess, InputTuple, input_tuples


class OutcomeRecord(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    outputs: list[str]
    prob: str


class ProcessRecord(BaseModel):
    """One level-``n`` entry: the output law given one tuple of inputs."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int = Field(ge=1)
    input_tuple: list[str]
    output_dist: list[OutcomeRecord]


def process_records(p: ControlledProcess) -> list[ProcessRecord]:
    records = []
    for n in range(1, p.horizon + 1):
        for inputs in input_tuples(p.inputs, n - 1):
            dist = p.level(n)[inputs]
            records.append(
                ProcessRecord(
                    n=n,
                    input_tuple=[str(i) for i in inputs],
                    output_dist=[
                        OutcomeRecord(outputs=[str(o) for o in outs], prob=format_rat(q))
                        for outs, q in dist
                    ],
                )
            )
    return records


def _lookup(carrier: FinSet, text: str, field: str) -> Label:
    for label in carrier:
        if str(label) == text:
            return label
    raise ParseError(f"unknown label {text!r} for {carrier.name!r}", field=field)


def process_from_records(
    inputs: FinSet, outputs: FinSet, records: Iterable[ProcessRecord]
) -> ControlledProcess:
    """Rebuild a process; labels are matched by their string form."""
    collected: dict[int, dict[InputTuple, Dist]] = {}
    for record in records:
        key = tuple(_lookup(inputs, text, "input_tuple") for text in record.input_tuple)
        if len(key) != record.n - 1:
            raise ParseError(
                f"level {record.n} needs {record.n - 1} inputs, got {len(key)}", field="input_tuple"
            )
        weights: dict[Label, Fraction] = {}
        for outcome in record.output_dist:
            outs = tuple(_lookup(outputs, text, "outputs") for text in outcome.outputs)
            weights[outs] = parse_rat(outcome.prob, field="prob")
        collected.setdefault(record.n, {})[key] = Dist.from_weights(
            FinSet.power(outputs, record.n), weights
        )
    horizon = max(collected, default=0)
    if sorted(collected) != list(range(1, horizon + 1)):
        raise ParseError("process records must cover levels 1..N without gaps", field="n")
    return ControlledProcess(
        inputs, outputs, horizon, tuple(collected[n] for n in range(1, horizon + 1))
    )
