"""Clustering statistic, posterior-predictive envelopes and posterior tables."""

from .envelope import Envelope, posterior_predictive_envelope
from .kstar import KStarCurve, default_distance_grid, kstar
from .posterior import ParameterSummary, PosteriorSummary, summarize_posterior

__all__ = [
    "Envelope",
    "KStarCurve",
    "ParameterSummary",
    "PosteriorSummary",
    "default_distance_grid",
    "kstar",
    "posterior_predictive_envelope",
    "summarize_posterior",
]
