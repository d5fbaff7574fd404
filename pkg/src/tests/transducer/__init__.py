"""Tests for controlled processes."""
