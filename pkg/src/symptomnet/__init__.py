"""Symptom-level depression/anxiety assessment over a discrete Bayesian network."""

__version__ = "0.1.0"
