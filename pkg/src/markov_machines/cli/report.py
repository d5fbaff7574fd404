"""Run reports: pydantic records written as JSON or rendered to Markdown with jinja2."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Literal

from jinja2 import Environment, FileSystemLoader
from pydantic import BaseModel, ConfigDict, Field

from markov_machines.filtering.belief import ImpossibleObservation
from markov_machines.filtering.sequence import TraceStep
from markov_machines.gauss.kalman import KalmanState
from markov_machines.transducer.records import ProcessRecord

TEMPLATES = Path(__file__).parent / "templates"
DEFAULT_TEMPLATE = TEMPLATES / "report.md.j2"

Status = Literal["ok", "failed", "impossible"]


class _Record(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class TraceRecord(_Record):
    step: int
    input: str
    output: str
    predicted: dict[str, str]
    posterior: dict[str, str] | None

    @classmethod
    def from_step(cls, step: TraceStep) -> TraceRecord:
        posterior = None if isinstance(step.posterior, ImpossibleObservation) else step.posterior
        return cls(
            step=step.step,
            input=str(step.input),
            output=str(step.output),
            predicted=step.predicted.to_record(),
            posterior=None if posterior is None else posterior.to_record(),
        )


class KalmanRecord(_Record):
    step: int
    hbar: list[float]
    sigma_p: list[list[float]]

    @classmethod
    def from_state(cls, step: int, state: KalmanState) -> KalmanRecord:
        return cls(step=step, hbar=state.hbar.tolist(), sigma_p=state.sigma_p.tolist())


class CheckRecord(_Record):
    suite: str
    status: Literal["passed", "failed", "skipped"]
    detail: str = ""
    witness: dict[str, str] | None = None


class OracleRecord(_Record):
    trials: int
    horizon: int
    seed: int
    agreements: int
    mismatches: int
    impossible: int
    mismatch_trials: list[int] = Field(default_factory=list)


class RunReport(_Record):
    """Everything a command produced; identical inputs and seed give identical bytes."""

    command: str
    arguments: dict[str, str]
    status: Status = "ok"
    trace: list[TraceRecord] = Field(default_factory=list)
    posterior: dict[str, str] | None = None
    impossible: dict[str, str | int] | None = None
    checks: list[CheckRecord] = Field(default_factory=list)
    oracle: OracleRecord | None = None
    process: list[ProcessRecord] = Field(default_factory=list)
    causal: bool | None = None
    kalman: list[KalmanRecord] = Field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return {"ok": 0, "failed": 3, "impossible": 4}[self.status]


def render_markdown(report: RunReport, template_path: Path = DEFAULT_TEMPLATE) -> str:
    env = Environment(
        loader=FileSystemLoader(template_path.parent),
        autoescape=False,
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=True,
    )
    template = env.get_template(template_path.name)
    data: dict[str, Any] = report.model_dump(mode="json")
    return template.render(report=data)


def render_json(report: RunReport) -> str:
    return report.model_dump_json(indent=2) + "\n"


def render(report: RunReport, out: Path | None = None) -> str:
    """JSON, or Markdown when ``out`` ends in ``.md``."""
    if out is not None and out.suffix == ".md":
        return render_markdown(report)
    return render_json(report)
