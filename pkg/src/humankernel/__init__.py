"""Toolkit for learning the covariance kernel behind a predictor's
extrapolations from multiple sets of its posterior predictions."""

__version__ = "0.1.0"
