"""Numerical verification of fractional Hardy-type inequalities on homogeneous groups."""

__version__ = "0.1.0"
