"""
dppi: dynamic point-process interaction models for group animal movement.

Continuous-time correlated random walks per individual, tilted by a pairwise
attraction-repulsion interaction, with forward simulators and a double
Metropolis-Hastings sampler for Bayesian fitting.
"""

__version__ = "0.1.0"
