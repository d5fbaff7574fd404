"""Tests for sequence filtering against the brute-force posterior."""

from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from markov_machines.core.dist import Dist
from markov_machines.core.generate import random_dist
from markov_machines.errors import HorizonMismatch
from markov_machines.filtering.belief import ImpossibleObservation
from markov_machines.filtering.sequence import filter_sequence, filter_trace, posterior_oracle
from markov_machines.machines.generate import random_comb_machine, random_mealy_machine
from markov_machines.machines.machine import CombMachine


class TestFilterSequence:
    def test_two_zeros(self, persist_state: CombMachine) -> None:
        """Two zeros from a uniform prior give 9/10 on ``a``."""
        posterior = filter_sequence(
            persist_state, Dist.uniform(persist_state.states), [(), ()], [0, 0]
        )
        assert posterior == Dist.from_weights(persist_state.states, {"a": F(9, 10), "b": F(1, 10)})

    def test_empty_sequence(self, persist_state: CombMachine) -> None:
        """No data leaves the prior alone."""
        prior = Dist.point(persist_state.states, "b")
        assert filter_sequence(persist_state, prior, [], []) == prior

    def test_length_mismatch(self, persist_state: CombMachine) -> None:
        """Inputs and outputs must pair up."""
        with pytest.raises(HorizonMismatch):
            filter_sequence(persist_state, Dist.uniform(persist_state.states), [()], [0, 1])

    def test_impossible_step(self, alternating: CombMachine) -> None:
        """The step index counts from zero."""
        result = filter_sequence(
            alternating, Dist.point(alternating.states, "a"), [(), (), ()], [0, 1, 1]
        )
        assert result == ImpossibleObservation(2, (), 1)


class TestAgainstOracle:
    @given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=0, max_value=4))
    @settings(max_examples=40, deadline=None)
    def test_comb_machines(self, seed: int, n: int) -> None:
        """Step-by-step filtering equals conditioning the full joint."""
        rng = np.random.default_rng(seed)
        m = random_comb_machine(rng, 2, 2, 3, sparsity=0.4)
        prior = random_dist(m.states, rng, sparsity=0.3)
        inputs = [m.inputs.elements[int(k)] for k in rng.integers(0, 2, size=n)]
        outputs = [m.outputs.elements[int(k)] for k in rng.integers(0, 2, size=n)]
        assert filter_sequence(m, prior, inputs, outputs) == posterior_oracle(m, prior, inputs, outputs)

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_mealy_machines(self, seed: int) -> None:
        """The same holds with input-dependent outputs."""
        rng = np.random.default_rng(seed)
        m = random_mealy_machine(rng, 2, 2, 2, sparsity=0.4)
        prior = random_dist(m.states, rng)
        inputs = list(m.inputs.elements) * 2
        outputs = [m.outputs.elements[int(k)] for k in rng.integers(0, 2, size=4)]
        assert filter_sequence(m, prior, inputs, outputs) == posterior_oracle(m, prior, inputs, outputs)


class TestTrace:
    def test_records_predictions(self, persist_state: CombMachine) -> None:
        """Each step keeps the prediction made before the observation."""
        trace = filter_trace(persist_state, Dist.uniform(persist_state.states), [(), ()], [0, 0])
        assert [step.step for step in trace] == [0, 1]
        assert trace[1].predicted(0) == F(5, 8)
        assert trace[1].posterior("a") == F(9, 10)

    def test_stops_after_impossible(self, alternating: CombMachine) -> None:
        """Nothing is recorded past the first impossible observation."""
        trace = filter_trace(
            alternating, Dist.point(alternating.states, "a"), [(), (), ()], [1, 0, 1]
        )
        assert len(trace) == 1
        assert isinstance(trace[0].posterior, ImpossibleObservation)


@pytest.mark.slow
class TestAcceptanceScale:
    def test_two_hundred_machines(self) -> None:
        """Random machine sizes up to four states, three inputs and three outputs."""
        root = np.random.SeedSequence(2024)
        for child in root.spawn(200):
            rng = np.random.default_rng(child)
            n_i, n_o, n_h = (int(v) for v in rng.integers(1, [4, 4, 5]))
            m = random_comb_machine(rng, n_i, n_o, n_h, sparsity=0.3)
            prior = random_dist(m.states, rng, sparsity=0.3)
            horizon = int(rng.integers(0, 6))
            inputs = [m.inputs.elements[int(k)] for k in rng.integers(0, n_i, size=horizon)]
            outputs = [m.outputs.elements[int(k)] for k in rng.integers(0, n_o, size=horizon)]
            assert filter_sequence(m, prior, inputs, outputs) == posterior_oracle(
                m, prior, inputs, outputs
            )
