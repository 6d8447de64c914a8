"""Homogeneity tests for right-censored discrete populations."""

__version__ = "0.1.0"
