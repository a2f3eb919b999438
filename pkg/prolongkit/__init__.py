"""Rank 2 prolongations of second order PDEs in two independent variables."""

__version__ = "0.1.0"
