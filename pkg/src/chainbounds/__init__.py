"""Chaining functionals, order-statistics decompositions and Monte Carlo
checks of multiplier / product empirical-process bounds."""

__version__ = "0.1.0"
