"""Numerical laboratory for hyperbolic SL(2,Z) dynamics on the 2-torus."""

__version__ = "0.1.0"
