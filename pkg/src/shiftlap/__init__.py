"""Difference operators, spectral decimation and renormalized Dirichlet eigenvalues on the full one-sided shift."""

__version__ = "0.1.0"
