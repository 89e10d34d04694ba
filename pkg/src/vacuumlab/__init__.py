"""Numerical laboratory for a nonlinear free-vacuum electrodynamics."""

__version__ = "0.1.0"
