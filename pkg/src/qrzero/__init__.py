"""Bayesian quantile regression for non-negative responses with a point mass
at zero, where zeros are either true zeros or left-censored draws."""

__version__ = "0.1.0"
