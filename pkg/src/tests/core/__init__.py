"""Tests for finite sets, distributions, kernels and conditionals."""
