"""Finite sets, exact distributions and Markov kernels."""
