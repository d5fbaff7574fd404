"""YAML file formats for machines, Kalman systems and observation traces.

Files are read and written through omegaconf and validated with pydantic. Every file
carries ``version: v1``; probabilities are strings ``"p/q"`` and labels are strings.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, Literal

from omegaconf import OmegaConf
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from markov_machines.core.dist import Dist
from markov_machines.core.finset import FinSet, Label
from markov_machines.core.kernel import Kernel
from markov_machines.core.rational import format_rat, parse_rat, parse_rat_list
from markov_machines.errors import (
    MarkovMachinesError,
    NotAComb,
    NotUnifilar,
    ParseError,
    ReadoutMismatch,
    ShapeMismatch,
)
from markov_machines.filtering.bayes import is_generator
from markov_machines.gauss.gaussian import GaussMorphism
from markov_machines.gauss.kalman import KalmanState
from markov_machines.machines.machine import (
    AnyMachine,
    CombMachine,
    MealyMachine,
    UnifilarMachine,
    check_comb,
)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "v1"
MachineKind = Literal["mealy", "comb", "unifilar"]


class _Record(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


def _as_label(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    return str(value)


class TransitionEntry(_Record):
    input: str
    state: str
    output: str
    next_state: str
    prob: str

    labels_as_text = field_validator("input", "state", "output", "next_state", mode="before")(_as_label)

    @field_validator("prob", mode="before")
    @classmethod
    def prob_as_text(cls, value: Any) -> str:
        return str(value)


class ReadoutEntry(_Record):
    state: str
    output: str
    prob: str

    labels_as_text = field_validator("state", "output", mode="before")(_as_label)

    @field_validator("prob", mode="before")
    @classmethod
    def prob_as_text(cls, value: Any) -> str:
        return str(value)


class MachineSpec(_Record):
    version: Literal["v1"] = SCHEMA_VERSION
    name: str = "machine"
    kind: MachineKind
    generator: bool = False
    inputs: list[str] = Field(min_length=1)
    outputs: list[str] = Field(min_length=1)
    states: list[str] = Field(min_length=1)
    transition: list[TransitionEntry]
    readout: list[ReadoutEntry] | None = None

    @field_validator("inputs", "outputs", "states", mode="before")
    @classmethod
    def label_list_as_text(cls, value: Any) -> Any:
        if isinstance(value, list):
            return [_as_label(v) for v in value]
        return value

    def sets(self) -> tuple[FinSet, FinSet, FinSet]:
        try:
            return (
                FinSet.of("I", self.inputs),
                FinSet.of("O", self.outputs),
                FinSet.of("S", self.states),
            )
        except MarkovMachinesError as exc:
            raise ParseError(str(exc), field="sets") from exc

    def _transition_kernel(self, inputs: FinSet, outputs: FinSet, states: FinSet) -> Kernel:
        rows: dict[Label, dict[Label, Fraction]] = {}
        for n, entry in enumerate(self.transition):
            where = f"transition[{n}]"
            for value, carrier in (
                (entry.input, inputs),
                (entry.state, states),
                (entry.output, outputs),
                (entry.next_state, states),
            ):
                if value not in carrier:
                    raise ParseError(f"unknown label {value!r} for {carrier.name}", field=where)
            row = rows.setdefault((entry.input, entry.state), {})
            key = (entry.output, entry.next_state)
            row[key] = row.get(key, Fraction(0)) + parse_rat(entry.prob, field=f"{where}.prob")
        source = FinSet.product(inputs, states)
        target = FinSet.product(outputs, states)
        missing = [pair for pair in source if pair not in rows]
        if missing:
            raise ParseError(f"no transition row for (input, state) {missing[0]!r}", field="transition")
        try:
            return Kernel.from_rows(source, target, rows)
        except MarkovMachinesError as exc:
            raise ParseError(str(exc), field="transition") from exc

    def _readout_kernel(self, outputs: FinSet, states: FinSet) -> Kernel | None:
        if self.readout is None:
            return None
        rows: dict[Label, dict[Label, Fraction]] = {}
        for n, entry in enumerate(self.readout):
            where = f"readout[{n}]"
            if entry.state not in states or entry.output not in outputs:
                raise ParseError(f"unknown label in {entry!r}", field=where)
            row = rows.setdefault(entry.state, {})
            row[entry.output] = row.get(entry.output, Fraction(0)) + parse_rat(
                entry.prob, field=f"{where}.prob"
            )
        try:
            return Kernel.from_rows(states, outputs, rows)
        except MarkovMachinesError as exc:
            raise ParseError(str(exc), field="readout") from exc

    def to_machine(self) -> AnyMachine:
        """Build the declared kind of machine, running its check.

        Raises:
            ParseError: If the tables are malformed or the declared kind's check fails.
        """
        inputs, outputs, states = self.sets()
        mealy = MealyMachine(inputs, outputs, states, self._transition_kernel(inputs, outputs, states))
        readout = self._readout_kernel(outputs, states)
        try:
            if self.kind == "mealy":
                return mealy
            if self.kind == "comb":
                return CombMachine(mealy, readout) if readout is not None else check_comb(mealy)
            try:
                base: MealyMachine | CombMachine = (
                    CombMachine(mealy, readout) if readout is not None else check_comb(mealy)
                )
            except NotAComb:
                base = mealy
            return UnifilarMachine.from_machine(base)
        except ReadoutMismatch as exc:
            raise ParseError(str(exc), field="readout") from exc
        except (NotAComb, NotUnifilar) as exc:
            raise ParseError(f"declared kind {self.kind!r} fails its check: {exc}", field="kind") from exc


def machine_spec_from(
    m: AnyMachine, *, name: str = "machine", generator: bool | None = None
) -> MachineSpec:
    """Serialize a machine; the kind is the most specific one the value carries.

    ``generator`` defaults to whether the machine has the shape of a generator.
    """
    base = m.machine if isinstance(m, UnifilarMachine) else m
    if generator is None:
        generator = is_generator(base)
    kind: MachineKind = (
        "unifilar" if isinstance(m, UnifilarMachine) else "comb" if isinstance(m, CombMachine) else "mealy"
    )
    transition = [
        TransitionEntry(
            input=_as_label(i),
            state=_as_label(s),
            output=_as_label(o),
            next_state=_as_label(s_next),
            prob=format_rat(p),
        )
        for (i, s), row in base.transition.items()
        for (o, s_next), p in row
    ]
    readout = None
    if isinstance(base, CombMachine):
        readout = [
            ReadoutEntry(state=_as_label(s), output=_as_label(o), prob=format_rat(p))
            for s, row in base.readout.items()
            for o, p in row
        ]
    return MachineSpec(
        name=name,
        kind=kind,
        generator=generator,
        inputs=[_as_label(x) for x in base.inputs],
        outputs=[_as_label(x) for x in base.outputs],
        states=[_as_label(x) for x in base.states],
        transition=transition,
        readout=readout,
    )


class KalmanInitial(_Record):
    hbar: list[float]
    sigma_p: list[list[float]]


class KalmanSystemSpec(_Record):
    """A system ``R^n -> R^(n+m)``; output coordinates are (hidden, observation)."""

    version: Literal["v1"] = SCHEMA_VERSION
    name: str = "system"
    hidden_dim: int = Field(ge=1)
    obs_dim: int = Field(ge=0)
    matrix: list[list[float]]
    offset: list[float] | None = None
    noise_cov: list[list[float]]
    initial: KalmanInitial

    def to_system(self) -> tuple[GaussMorphism, KalmanState]:
        n, m = self.hidden_dim, self.obs_dim
        offset = self.offset if self.offset is not None else [0.0] * (n + m)
        try:
            system = GaussMorphism(self.matrix, offset, self.noise_cov)
            state = KalmanState(self.initial.hbar, self.initial.sigma_p)
        except (ShapeMismatch, ValueError) as exc:
            raise ParseError(str(exc), field="matrix") from exc
        except MarkovMachinesError as exc:
            raise ParseError(str(exc), field="noise_cov") from exc
        if system.in_dim != n or system.out_dim != n + m or state.dim != n:
            raise ParseError(
                f"expected a {n + m}x{n} matrix and a {n}-dim initial state", field="matrix"
            )
        return system, state


class ObservationTrace(_Record):
    version: Literal["v1"] = SCHEMA_VERSION
    observations: list[list[float]]

    @field_validator("observations", mode="before")
    @classmethod
    def scalars_as_vectors(cls, value: Any) -> Any:
        if isinstance(value, list):
            return [v if isinstance(v, list) else [v] for v in value]
        return value


def _read_yaml(path: str | Path) -> dict[str, Any]:
    file_path = Path(path)
    if not file_path.exists():
        raise ParseError(f"file not found: {file_path}")
    try:
        loaded = OmegaConf.load(file_path)
    except Exception as exc:  # yaml scanner/parser errors carry a problem mark
        mark = getattr(exc, "problem_mark", None)
        raise ParseError(str(exc), line=None if mark is None else mark.line + 1) from exc
    container = OmegaConf.to_container(loaded, resolve=True)
    if not isinstance(container, dict):
        raise ParseError(f"{file_path} must contain a mapping")
    return {str(k): v for k, v in container.items()}


def _validate(model: type[_Record], data: dict[str, Any]) -> Any:
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        field = ".".join(str(part) for part in first["loc"])
        raise ParseError(first["msg"], field=field or None) from exc


def load_machine_spec(path: str | Path) -> MachineSpec:
    spec: MachineSpec = _validate(MachineSpec, _read_yaml(path))
    logger.debug("loaded %s machine %r from %s", spec.kind, spec.name, path)
    return spec


def load_kalman_system(path: str | Path) -> KalmanSystemSpec:
    spec: KalmanSystemSpec = _validate(KalmanSystemSpec, _read_yaml(path))
    return spec


def load_observations(path: str | Path) -> ObservationTrace:
    trace: ObservationTrace = _validate(ObservationTrace, _read_yaml(path))
    return trace


def dump_yaml(model: BaseModel, path: str | Path) -> None:
    OmegaConf.save(OmegaConf.create(model.model_dump(mode="json", exclude_none=True)), Path(path))


def parse_labels(text: str | None, carrier: FinSet, what: str) -> list[Label]:
    """Comma separated labels matched against ``carrier`` by their string form."""
    if text is None or not text.strip():
        return []
    by_name = {_as_label(label): label for label in carrier}
    labels = []
    for part in text.split(","):
        key = part.strip()
        if key not in by_name:
            raise ParseError(f"unknown label {key!r}", field=what)
        labels.append(by_name[key])
    return labels


def parse_prior(text: str | None, states: FinSet) -> Dist:
    """``"1/2,1/2"`` in state order; uniform when ``text`` is empty."""
    if text is None or not text.strip():
        return Dist.uniform(states)
    weights = parse_rat_list(text, field="prior")
    if len(weights) != len(states):
        raise ParseError(f"{len(weights)} weights for {len(states)} states", field="prior")
    try:
        return Dist.from_weights(states, dict(zip(states, weights, strict=True)))
    except MarkovMachinesError as exc:
        raise ParseError(str(exc), field="prior") from exc
