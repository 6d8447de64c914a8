"""Tests for survtest."""
