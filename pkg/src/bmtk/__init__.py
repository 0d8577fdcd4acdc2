"""Numerical toolkit for completeness radii of exponential systems,
Toeplitz-kernel transition parameters and the Hilbert-transform
certificates behind them."""

__version__ = "0.1.0"
