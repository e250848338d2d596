"""Numerical potential theory on the Heisenberg group H^1."""

__version__ = "0.1.0"
