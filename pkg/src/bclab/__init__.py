"""Numerical laboratory for Bernoulli convolutions and their linear response."""
__version__ = "0.1.0"
