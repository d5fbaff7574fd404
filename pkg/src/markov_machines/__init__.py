"""Exact Bayesian filtering for finite stochastic machines."""

__version__ = "0.1.0"
