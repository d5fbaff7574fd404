"""Stochastic Mealy, comb and unifilar machines."""
