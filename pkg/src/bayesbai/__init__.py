"""Exact small-horizon Bayes-optimal policies for fixed-budget Gaussian
best-arm identification, plus Monte-Carlo study tooling."""

__version__ = "0.1.0"
