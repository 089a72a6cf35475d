"""Hyperbolic secant distribution and numerical checks of its characterizations."""

__version__ = "0.1.0"
