"""Stationary covariance estimation and simultaneous confidence bands for dense functional data."""

__version__ = "1.0.0"
