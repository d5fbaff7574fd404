"""Tests for single filtering steps and the lazy belief machine."""

from fractions import Fraction as F

import numpy as np
import pytest

from markov_machines.core.dist import Dist
from markov_machines.core.finset import Label
from markov_machines.core.generate import random_dist
from markov_machines.errors import NotAComb
from markov_machines.filtering.belief import (
    ImpossibleObservation,
    build_filter,
    filter_step,
    predict_output,
)
from markov_machines.machines.generate import random_comb_machine, random_mealy_machine
from markov_machines.machines.machine import CombMachine, MealyMachine


class TestPredict:
    def test_uniform_prior(self, persist_state: CombMachine) -> None:
        """Both outputs are equally likely before any data."""
        predicted = predict_output(persist_state, Dist.uniform(persist_state.states))
        assert predicted.vector() == (F(1, 2), F(1, 2))

    def test_mealy_needs_input(self, echo: MealyMachine) -> None:
        """Without the input a Mealy machine cannot predict."""
        with pytest.raises(ValueError):
            predict_output(echo, Dist.uniform(echo.states))
        assert predict_output(echo, Dist.uniform(echo.states), 1) == Dist.point(echo.outputs, 1)


class TestFilterStep:
    def test_one_observation(self, persist_state: CombMachine) -> None:
        """Seeing a 0 from a uniform prior gives 3/4 on ``a``."""
        posterior = filter_step(persist_state, Dist.uniform(persist_state.states), (), 0)
        assert posterior == Dist.from_weights(persist_state.states, {"a": F(3, 4), "b": F(1, 4)})

    def test_impossible_observation(self, alternating: CombMachine) -> None:
        """State ``a`` never emits 1; the failure is a value, not an exception."""
        result = filter_step(alternating, Dist.point(alternating.states, "a"), (), 1, step=3)
        assert result == ImpossibleObservation(3, (), 1)
        assert result.as_record() == {"step": 3, "input": "()", "output": "1"}

    def test_deterministic_machine_tracks_state(self, alternating: CombMachine) -> None:
        """An observed 0 pins the next state to ``b``."""
        posterior = filter_step(alternating, Dist.uniform(alternating.states), (), 0)
        assert posterior == Dist.point(alternating.states, "b")


class TestBeliefMachine:
    def test_comb_required_by_default(self, echo: MealyMachine) -> None:
        """A Mealy model needs the input-first wiring."""
        with pytest.raises(NotAComb):
            build_filter(echo)
        machine = build_filter(echo, mealy=True)
        assert not machine.is_comb

    def test_step_branches(self, persist_state: CombMachine) -> None:
        """One branch per output, weighted by the predicted probability."""
        machine = build_filter(persist_state)
        uniform = Dist.uniform(persist_state.states)
        branches = machine.step(uniform, ())
        assert sum(branches.values()) == 1
        assert branches[(0, Dist.from_weights(persist_state.states, {"a": F(3, 4), "b": F(1, 4)}))] == F(1, 2)

    def test_memoized_updates(self, persist_state: CombMachine) -> None:
        """Cached updates equal fresh ones."""
        cached = build_filter(persist_state, memoize=True)
        fresh = build_filter(persist_state)
        b = Dist.uniform(persist_state.states)
        for _ in range(2):
            assert cached.update(b, (), 1) == fresh.update(b, (), 1)
        assert len(cached._memo) == 1


def _state_marginal(k: CombMachine | MealyMachine, b: Dist, i: Label) -> Dist:
    weights: dict[Label, F] = {}
    for h, p in b:
        for (_, h_next), q in k.transition.row((i, h)):
            weights[h_next] = weights.get(h_next, F(0)) + p * q
    return Dist.from_weights(k.states, weights)


class TestPosteriorMixture:
    @pytest.mark.parametrize("seed", range(30))
    @pytest.mark.parametrize("comb", [True, False])
    def test_posteriors_average_to_prediction(self, seed: int, comb: bool) -> None:
        """Weighting each posterior by its predicted output gives the one-step state law."""
        rng = np.random.default_rng(seed)
        k = (
            random_comb_machine(rng, 2, 3, 3)
            if comb
            else random_mealy_machine(rng, 2, 3, 3)
        )
        b = random_dist(k.states, rng, sparsity=0.3)
        for i in k.inputs:
            predicted = predict_output(k, b, i)
            mixed: dict[Label, F] = {}
            for o, p in predicted:
                posterior = filter_step(k, b, i, o)
                assert not isinstance(posterior, ImpossibleObservation)
                for h, q in posterior:
                    mixed[h] = mixed.get(h, F(0)) + p * q
            assert Dist.from_weights(k.states, mixed) == _state_marginal(k, b, i)
