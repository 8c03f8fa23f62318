"""Stationary points and eigenpairs of regular simplex tensors."""

__version__ = "0.1.0"
