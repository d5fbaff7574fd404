"""Tests for markov_machines."""
