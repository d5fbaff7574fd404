"""Tests for machines and their morphisms."""
