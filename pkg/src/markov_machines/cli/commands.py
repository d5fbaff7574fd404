"""The CLI commands as plain functions returning a :class:`RunReport`."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from pathlib import Path
from typing import Literal

import anyio
import anyio.to_thread
import numpy as np
from typing_extensions import assert_never

from markov_machines.cli.report import (
    CheckRecord,
    KalmanRecord,
    OracleRecord,
    RunReport,
    TraceRecord,
)
from markov_machines.cli.spec_format import (
    MachineSpec,
    load_kalman_system,
    load_machine_spec,
    load_observations,
    parse_labels,
    parse_prior,
)
from markov_machines.config import Settings
from markov_machines.core.dist import Dist
from markov_machines.core.finset import Label
from markov_machines.core.generate import random_dist
from markov_machines.errors import ConfigError, NotAGenerator, ParseError
from markov_machines.filtering.adjunction import (
    ReachableBeliefs,
    belief_submachine,
    inclusion,
    reachable_beliefs,
)
from markov_machines.filtering.bayes import exchangeability_check
from markov_machines.filtering.belief import ImpossibleObservation
from markov_machines.filtering.interpretation import check_interpretation
from markov_machines.filtering.sequence import filter_sequence, filter_trace, posterior_oracle
from markov_machines.gauss.kalman import kalman_filter
from markov_machines.machines.machine import (
    AnyMachine,
    CombMachine,
    Machine,
    UnifilarMachine,
    check_comb,
    comb_witness,
    is_unifilar,
)
from markov_machines.transducer.process import check_causality, unroll
from markov_machines.transducer.records import process_records

logger = logging.getLogger(__name__)

SuiteName = Literal["comb", "unifilar", "interpretation", "exchangeability"]
Suite = SuiteName | Literal["all"]
SUITES: tuple[SuiteName, ...] = ("comb", "unifilar", "interpretation", "exchangeability")


def _model(m: AnyMachine) -> tuple[Machine, bool]:
    """The machine to filter with, and whether it needs the input-first wiring."""
    base = m.machine if isinstance(m, UnifilarMachine) else m
    return base, not isinstance(base, CombMachine)


def _load(path: str | Path) -> tuple[MachineSpec, AnyMachine]:
    spec = load_machine_spec(path)
    return spec, spec.to_machine()


def _inputs_for(m: Machine, text: str | None, length: int) -> list[Label]:
    inputs = parse_labels(text, m.inputs, "inputs")
    if not inputs and length and len(m.inputs) == 1:
        return [m.inputs.elements[0]] * length
    return inputs


def cmd_filter(
    machine_file: str | Path,
    prior: str | None,
    inputs: str | None,
    outputs: str | None,
) -> RunReport:
    spec, machine = _load(machine_file)
    model, _ = _model(machine)
    b0 = parse_prior(prior, model.states)
    outs = parse_labels(outputs, model.outputs, "outputs")
    ins = _inputs_for(model, inputs, len(outs))
    if len(ins) != len(outs):
        raise ParseError(f"{len(ins)} inputs but {len(outs)} outputs", field="outputs")
    trace = filter_trace(model, b0, ins, outs)
    arguments = {
        "machine": str(machine_file),
        "prior": str(b0),
        "inputs": ",".join(map(str, ins)),
        "outputs": ",".join(map(str, outs)),
    }
    records = [TraceRecord.from_step(step) for step in trace]
    last = trace[-1].posterior if trace else b0
    if isinstance(last, ImpossibleObservation):
        logger.info("observation %r at step %d is impossible", last.output, last.step)
        return RunReport(
            command="filter",
            arguments=arguments,
            status="impossible",
            trace=records,
            impossible=last.as_record(),
        )
    logger.info("filtered %d steps of %s", len(trace), spec.name)
    return RunReport(command="filter", arguments=arguments, trace=records, posterior=last.to_record())


def _check_comb(machine: AnyMachine) -> CheckRecord:
    base = machine.machine if isinstance(machine, UnifilarMachine) else machine
    witness = comb_witness(base.underlying)
    if witness is None:
        return CheckRecord(suite="comb", status="passed")
    return CheckRecord(
        suite="comb",
        status="failed",
        detail="output law depends on the input",
        witness=witness.as_record(),
    )


def _check_unifilar(machine: AnyMachine) -> CheckRecord:
    model, _ = _model(machine)
    if is_unifilar(model):
        return CheckRecord(suite="unifilar", status="passed")
    return CheckRecord(
        suite="unifilar", status="failed", detail="next state is not determined by (o, i, s)"
    )


def _check_interpretation(machine: AnyMachine, settings: Settings) -> CheckRecord:
    """The filter's reachable beliefs from the uniform prior interpret the model."""
    model, mealy = _model(machine)
    found = reachable_beliefs(
        model,
        [Dist.uniform(model.states)],
        max_beliefs=settings.filtering.max_beliefs,
        max_depth=settings.oracle.max_horizon,
        mealy=mealy,
    )
    if not isinstance(found, ReachableBeliefs) or not found.closed:
        return CheckRecord(
            suite="interpretation",
            status="skipped",
            detail="reachable beliefs do not close within the configured bounds",
        )
    submachine = belief_submachine(model, found.beliefs, mealy=mealy)
    psi = inclusion(found.beliefs, model.states)
    if check_interpretation(psi, submachine, model, mealy=mealy):
        return CheckRecord(
            suite="interpretation",
            status="passed",
            detail=f"{len(found.beliefs)} reachable beliefs",
        )
    return CheckRecord(suite="interpretation", status="failed", detail="filter equation fails")


def _check_exchangeability(machine: AnyMachine) -> CheckRecord:
    model, _ = _model(machine)
    try:
        passed = exchangeability_check(model)
    except NotAGenerator as exc:
        return CheckRecord(suite="exchangeability", status="failed", detail=str(exc))
    if passed:
        return CheckRecord(suite="exchangeability", status="passed")
    return CheckRecord(
        suite="exchangeability", status="failed", detail="two-step output law is not symmetric"
    )


def _run_suite(name: SuiteName, machine: AnyMachine, settings: Settings) -> CheckRecord:
    if name == "comb":
        return _check_comb(machine)
    if name == "unifilar":
        return _check_unifilar(machine)
    if name == "interpretation":
        return _check_interpretation(machine, settings)
    if name == "exchangeability":
        return _check_exchangeability(machine)
    assert_never(name)


def _applicable(suite: str, spec: MachineSpec, machine: AnyMachine) -> bool:
    if suite == "comb":
        return spec.kind != "mealy"
    if suite == "unifilar":
        return isinstance(machine, UnifilarMachine)
    if suite == "exchangeability":
        return spec.generator
    return True


def cmd_check(machine_file: str | Path, suite: Suite, settings: Settings) -> RunReport:
    """Run one suite, or with ``all`` every suite that applies to the declared kind."""
    spec, machine = _load(machine_file)
    selected = SUITES if suite == "all" else (suite,)
    checks = []
    for name in selected:
        if suite == "all" and not _applicable(name, spec, machine):
            checks.append(CheckRecord(suite=name, status="skipped", detail="does not apply to this machine"))
            continue
        checks.append(_run_suite(name, machine, settings))
    failed = any(check.status == "failed" for check in checks)
    return RunReport(
        command="check",
        arguments={"machine": str(machine_file), "suite": suite},
        status="failed" if failed else "ok",
        checks=checks,
    )


def _sample(d: Dist, rng: np.random.Generator) -> Label:
    labels = [label for label, _ in d]
    probs = np.array([float(p) for _, p in d])
    return labels[int(rng.choice(len(labels), p=probs / probs.sum()))]


def _oracle_trial(
    model: Machine, horizon: int, seed: np.random.SeedSequence
) -> tuple[bool, bool]:
    """One random trace: (filter agrees with the oracle, trace was impossible)."""
    rng = np.random.default_rng(seed)
    prior = random_dist(model.states, rng, sparsity=0.3)
    inputs = [model.inputs.elements[int(j)] for j in rng.integers(len(model.inputs), size=horizon)]
    s = _sample(prior, rng)
    outputs = []
    for i in inputs:
        o, s = _sample(model.transition.row((i, s)), rng)
        outputs.append(o)
    if horizon and rng.random() < 0.25:
        outputs[int(rng.integers(horizon))] = model.outputs.elements[
            int(rng.integers(len(model.outputs)))
        ]
    filtered = filter_sequence(model, prior, inputs, outputs)
    oracle = posterior_oracle(model, prior, inputs, outputs)
    return filtered == oracle, isinstance(oracle, ImpossibleObservation)


async def _run_parallel(
    model: Machine, horizon: int, seeds: Sequence[np.random.SeedSequence], parallel: int
) -> list[tuple[bool, bool]]:
    results: list[tuple[bool, bool] | None] = [None] * len(seeds)
    limiter = anyio.CapacityLimiter(parallel)

    async def run_one(index: int) -> None:
        results[index] = await anyio.to_thread.run_sync(
            _oracle_trial, model, horizon, seeds[index], limiter=limiter
        )

    async with anyio.create_task_group() as tg:
        for index in range(len(seeds)):
            tg.start_soon(run_one, index)
    return [r for r in results if r is not None]


def cmd_oracle(
    machine_file: str | Path,
    trials: int,
    horizon: int,
    seed: int,
    settings: Settings,
    parallel: int = 0,
) -> RunReport:
    """Compare :func:`filter_sequence` against the brute-force oracle on random traces."""
    caps = settings.oracle
    if not 0 <= trials <= caps.max_trials:
        raise ConfigError(f"trials must be within 0..{caps.max_trials}")
    if not 0 <= horizon <= caps.max_horizon:
        raise ConfigError(f"horizon must be within 0..{caps.max_horizon}")
    spec, machine = _load(machine_file)
    model, _ = _model(machine)
    if len(model.states) > caps.max_states:
        raise ConfigError(f"{len(model.states)} states exceed oracle.max_states={caps.max_states}")
    seeds = np.random.SeedSequence(seed).spawn(trials)
    if parallel > 1:
        results = anyio.run(_run_parallel, model, horizon, seeds, parallel)
    else:
        results = [_oracle_trial(model, horizon, s) for s in seeds]
    mismatch_trials = [index for index, (agree, _) in enumerate(results) if not agree]
    logger.info("oracle on %s: %d/%d agreements", spec.name, trials - len(mismatch_trials), trials)
    return RunReport(
        command="oracle",
        arguments={
            "machine": str(machine_file),
            "trials": str(trials),
            "horizon": str(horizon),
            "seed": str(seed),
        },
        status="failed" if mismatch_trials else "ok",
        oracle=OracleRecord(
            trials=trials,
            horizon=horizon,
            seed=seed,
            agreements=trials - len(mismatch_trials),
            mismatches=len(mismatch_trials),
            impossible=sum(1 for _, impossible in results if impossible),
            mismatch_trials=mismatch_trials,
        ),
    )


def cmd_unroll(
    machine_file: str | Path, prior: str | None, horizon: int, settings: Settings | None = None
) -> RunReport:
    if horizon < 1:
        raise ParseError("horizon must be at least 1", field="horizon")
    if settings is not None and horizon > settings.oracle.max_horizon:
        raise ConfigError(f"horizon must be within 1..{settings.oracle.max_horizon}")
    spec, machine = _load(machine_file)
    model, _ = _model(machine)
    comb = model if isinstance(model, CombMachine) else check_comb(model)
    b0 = parse_prior(prior, comb.states)
    process = unroll(comb, b0, horizon)
    causal = check_causality(process)
    logger.info("unrolled %s to horizon %d", spec.name, horizon)
    return RunReport(
        command="unroll",
        arguments={"machine": str(machine_file), "prior": str(b0), "horizon": str(horizon)},
        status="ok" if causal else "failed",
        process=process_records(process),
        causal=causal,
    )


def cmd_kalman(
    system_file: str | Path, observations_file: str | Path, settings: Settings | None = None
) -> RunReport:
    system, state = load_kalman_system(system_file).to_system()
    observations = load_observations(observations_file).observations
    tolerances = settings.gauss if settings is not None else None
    trace = kalman_filter(system, state, observations, tolerances)
    return RunReport(
        command="kalman",
        arguments={"system": str(system_file), "observations": str(observations_file)},
        kalman=[KalmanRecord.from_state(step, s) for step, s in enumerate(trace)],
    )
