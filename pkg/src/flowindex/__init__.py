"""Spectral flow and Maslov index computations for symplectic Hilbert spaces."""

__version__ = "0.1.0"
