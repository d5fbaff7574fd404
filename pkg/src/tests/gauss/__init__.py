"""Tests for the Gaussian algebra and the Kalman filter."""
