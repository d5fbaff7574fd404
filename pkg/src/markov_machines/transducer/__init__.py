"""Controlled stochastic processes and the behaviour of comb machines."""

from markov_machines.transducer.process import (
    ControlledProcess,
    behaviour_equal,
    causality_witness,
    check_causality,
    mix_processes,
    process_update,
    unroll,
)
from markov_machines.transducer.records import process_from_records, process_records

__all__ = [
    "ControlledProcess",
    "behaviour_equal",
    "causality_witness",
    "check_causality",
    "mix_processes",
    "process_from_records",
    "process_records",
    "process_update",
    "unroll",
]
