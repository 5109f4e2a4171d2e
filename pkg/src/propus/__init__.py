"""Propus-type symmetric Hadamard matrices from supplementary difference sets."""

__version__ = "0.1.0"
