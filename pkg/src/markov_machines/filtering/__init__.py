"""Belief filtering, the belief machine B(κ), and Bayesian inference on generators."""

from markov_machines.filtering.belief import (
    Belief,
    BeliefMachine,
    ImpossibleObservation,
    build_filter,
    filter_step,
    predict_output,
)
from markov_machines.filtering.sequence import filter_sequence, filter_trace, posterior_oracle

__all__ = [
    "Belief",
    "BeliefMachine",
    "ImpossibleObservation",
    "build_filter",
    "filter_sequence",
    "filter_step",
    "filter_trace",
    "posterior_oracle",
    "predict_output",
]
