"""Bayesian fitting of the independent and interacting group models."""

from .chain import ChainConfig, ChainState, init_chain
from .diagnostics import batch_means_mcse, half_chain_ks
from .latent import update_latent_states
from .priors import (
    NormalPrior,
    PriorSpec,
    TruncatedNormalPrior,
    UniformPrior,
    estimate_hardcore_radius,
    prior_log_density,
)
from .samplers import (
    PosteriorSamples,
    double_mh_update,
    fit_chains,
    fit_dppi,
    fit_independent,
    nested_auxiliary_sample,
    tune_nested_length,
)

__all__ = [
    "ChainConfig",
    "ChainState",
    "NormalPrior",
    "PosteriorSamples",
    "PriorSpec",
    "TruncatedNormalPrior",
    "UniformPrior",
    "batch_means_mcse",
    "double_mh_update",
    "estimate_hardcore_radius",
    "fit_chains",
    "fit_dppi",
    "fit_independent",
    "half_chain_ks",
    "init_chain",
    "nested_auxiliary_sample",
    "prior_log_density",
    "tune_nested_length",
    "update_latent_states",
]
