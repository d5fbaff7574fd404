"""Tests for belief filtering."""
