"""Regression depth of linear fits and the maximum-depth estimator."""

__version__ = "0.1.0"
