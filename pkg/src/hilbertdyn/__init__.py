"""Hilbert-metric geometry and nonexpansive dynamics on bounded convex domains."""

__version__ = "0.1.0"
