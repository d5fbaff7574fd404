"""Tests for controlled processes: unrolling, causality, conditioning, mixtures."""

from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from markov_machines.core.dist import Dist
from markov_machines.core.finset import FinSet
from markov_machines.core.generate import random_dist
from markov_machines.errors import HorizonMismatch, InvalidDistribution, SetMismatch
from markov_machines.filtering.belief import ImpossibleObservation, filter_step
from markov_machines.machines.generate import random_comb_machine
from markov_machines.machines.machine import CombMachine
from markov_machines.transducer.process import (
    ControlledProcess,
    behaviour_equal,
    causality_witness,
    check_causality,
    mix_processes,
    process_update,
    unroll,
)
from tests.conftest import with_twin_state

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def peeking_process() -> ControlledProcess:
    """The second output copies the current input, the first one reports it too."""
    inputs = FinSet.of("I", ["l", "r"])
    outputs = FinSet.of("O", ["l", "r"])
    first = Dist.uniform(FinSet.power(outputs, 1))
    second = {(i,): Dist.point(FinSet.power(outputs, 2), (i, i)) for i in inputs}
    return ControlledProcess(inputs, outputs, 2, ({(): first}, second))


class TestUnroll:
    def test_persistent_state(self, persist_state: CombMachine) -> None:
        """Two zeros from uniform have probability 5/16."""
        p = unroll(persist_state, Dist.uniform(persist_state.states), 3)
        assert p((0,)) == F(1, 2)
        assert p((0, 0), ((),)) == F(5, 16)
        assert p.level(3)[((), ())]((0, 0, 0)) == F(7, 32)

    def test_horizon_bounds(self, persist_state: CombMachine) -> None:
        with pytest.raises(HorizonMismatch):
            unroll(persist_state, Dist.uniform(persist_state.states), 0)
        p = unroll(persist_state, Dist.uniform(persist_state.states), 2)
        with pytest.raises(HorizonMismatch):
            p.level(3)

    @given(seeds)
    @settings(max_examples=25, deadline=None)
    def test_unrolled_processes_are_causal(self, seed: int) -> None:
        """Machines can never look ahead."""
        rng = np.random.default_rng(seed)
        m = random_comb_machine(rng, 2, 2, 2, sparsity=0.3)
        assert check_causality(unroll(m, random_dist(m.states, rng), 3))


class TestValidation:
    def test_missing_input_tuple(self) -> None:
        """Every level is keyed by all input tuples of the right length."""
        p = peeking_process()
        with pytest.raises(SetMismatch):
            ControlledProcess(p.inputs, p.outputs, 2, (p.level(1), {("l",): p.level(2)[("l",)]}))

    def test_level_count(self) -> None:
        p = peeking_process()
        with pytest.raises(HorizonMismatch):
            ControlledProcess(p.inputs, p.outputs, 3, p.levels)


class TestCausality:
    def test_peeking_is_caught(self) -> None:
        """The first output may not depend on a later input."""
        witness = causality_witness(peeking_process())
        assert witness is not None
        n, inputs, _ = witness
        assert n == 2
        assert inputs == ("l",)
        assert not check_causality(peeking_process())

    def test_conditioning_needs_causality(self) -> None:
        """Conditioning a peeking process leaves an unnormalised level."""
        with pytest.raises(InvalidDistribution, match="not causal"):
            process_update(peeking_process(), "l", "r")


class TestProcessUpdate:
    @given(seeds, st.integers(min_value=0, max_value=1))
    @settings(max_examples=30, deadline=None)
    def test_commutes_with_filtering(self, seed: int, o_index: int) -> None:
        """Conditioning the unrolled process is unrolling the filtered belief."""
        rng = np.random.default_rng(seed)
        m = random_comb_machine(rng, 2, 2, 2, sparsity=0.3)
        b = random_dist(m.states, rng)
        i, o = m.inputs.elements[0], m.outputs.elements[o_index]
        conditioned = process_update(unroll(m, b, 3), i, o)
        posterior = filter_step(m, b, i, o)
        if isinstance(posterior, ImpossibleObservation):
            assert conditioned == ImpossibleObservation(0, i, o)
        else:
            assert conditioned == unroll(m, posterior, 2)

    @given(seeds, st.integers(min_value=2, max_value=5))
    @settings(max_examples=100, deadline=None)
    def test_commutes_for_every_observation(self, seed: int, horizon: int) -> None:
        """Every first input and output, at every horizon up to five."""
        rng = np.random.default_rng(seed)
        m = random_comb_machine(rng, 2, 2, 2, sparsity=0.3)
        b = random_dist(m.states, rng, sparsity=0.3)
        p = unroll(m, b, horizon)
        for i in m.inputs:
            for o in m.outputs:
                conditioned = process_update(p, i, o)
                posterior = filter_step(m, b, i, o)
                if isinstance(posterior, ImpossibleObservation):
                    assert conditioned == ImpossibleObservation(0, i, o)
                else:
                    assert conditioned == unroll(m, posterior, horizon - 1)

    def test_impossible_first_output(self, alternating: CombMachine) -> None:
        p = unroll(alternating, Dist.point(alternating.states, "a"), 2)
        assert process_update(p, (), 1) == ImpossibleObservation(0, (), 1)

    def test_needs_two_levels(self, persist_state: CombMachine) -> None:
        p = unroll(persist_state, Dist.uniform(persist_state.states), 1)
        with pytest.raises(HorizonMismatch):
            process_update(p, (), 0)


class TestBehaviour:
    def test_twin_states(self, persist_state: CombMachine) -> None:
        """A duplicated state behaves like its original and unlike the other state."""
        twin = with_twin_state(persist_state)
        a2 = Dist.point(twin.states, "a2")
        assert behaviour_equal(twin, a2, persist_state, Dist.point(persist_state.states, "a"), 3)
        assert not behaviour_equal(
            twin, a2, persist_state, Dist.point(persist_state.states, "b"), 3
        )

    def test_mixture_of_point_starts(self, persist_state: CombMachine) -> None:
        """Mixing the behaviours of the pure starts gives the behaviour of the mixed start."""
        states = persist_state.states
        mixed = mix_processes(
            [
                (F(1, 3), unroll(persist_state, Dist.point(states, "a"), 3)),
                (F(2, 3), unroll(persist_state, Dist.point(states, "b"), 3)),
            ]
        )
        prior = Dist.from_weights(states, {"a": F(1, 3), "b": F(2, 3)})
        assert mixed == unroll(persist_state, prior, 3)

    def test_mixture_weights(self, persist_state: CombMachine) -> None:
        p = unroll(persist_state, Dist.uniform(persist_state.states), 2)
        with pytest.raises(InvalidDistribution):
            mix_processes([(F(1, 2), p)])
        with pytest.raises(SetMismatch):
            mix_processes([])


class TestHashing:
    def test_equal_processes_hash_alike(self, persist_state: CombMachine) -> None:
        """Two unrolls of the same machine are interchangeable as set members."""
        prior = Dist.uniform(persist_state.states)
        p, q = unroll(persist_state, prior, 3), unroll(persist_state, prior, 3)
        assert p == q
        assert hash(p) == hash(q)
        assert len({p, q}) == 1
        assert unroll(persist_state, Dist.point(persist_state.states, "a"), 3) not in {p}

    def test_levels_are_read_only(self, persist_state: CombMachine) -> None:
        """Mutating a level would change the hash, so levels refuse assignment."""
        p = unroll(persist_state, Dist.uniform(persist_state.states), 2)
        with pytest.raises(TypeError):
            p.level(1)[()] = Dist.point(p.output_set(1), (0,))  # type: ignore[index]

    def test_levels_copied_from_caller(self) -> None:
        """Later edits to the caller's dicts do not reach the process."""
        p = peeking_process()
        second = {inputs: dist for inputs, dist in p.level(2).items()}
        q = ControlledProcess(p.inputs, p.outputs, 2, (dict(p.level(1)), second))
        before = hash(q)
        second[("l",)] = second[("r",)]
        assert hash(q) == before
        assert q == p
