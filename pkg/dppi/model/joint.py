"""
Unnormalised joint density of the group movement model.

The joint density of observations S and latent states A is

    h(S | A, sigma_e2) * g(A | beta, gamma, sigma2) * psi(A | theta) / c(theta)

where g is the product of per-individual CTCRW transitions and initial states,
h the product of isotropic observation densities, and psi the product of
pairwise interaction weights over every time point. The normalising function
c is never evaluated here; the samplers are built so that it cancels.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from ..contracts.models import InteractionParams, MovementParams, ObservationSet, PathSet, State
from ..interaction.attraction_repulsion import (
    AttractionRepulsion,
    InteractionFunction,
    log_weight_path,
)
from ..motion.kernel import (
    initial_location_log_density,
    initial_velocity_log_density,
    observation_log_density,
    step_terms,
    transition_log_density,
)

# Variance (px^2) of the first latent location around its anchor.
DEFAULT_LOCATION_VAR = 1.0


def pairwise_distance(a: State, b: State) -> float:
    """Euclidean distance between two true locations; velocities are ignored."""
    return math.hypot(a.mu_x - b.mu_x, a.mu_y - b.mu_y)


def transition_log_terms(states: np.ndarray, params: MovementParams, steps: np.ndarray) -> np.ndarray:
    """Per (step, individual) transition log densities, shape (N-1, K)."""
    terms = step_terms(params.beta, steps).column()
    return transition_log_density(states[:-1], states[1:], params, terms)


def log_g(
    paths: PathSet,
    params: MovementParams,
    anchor: Optional[np.ndarray] = None,
    location_var: float = DEFAULT_LOCATION_VAR,
) -> float:
    """Log density of the latent paths under independent movement.

    The first time point contributes the stationary velocity density and,
    when an anchor (K, 2) is given, the initial location density around it.
    """
    states = paths.states
    total = float(np.sum(transition_log_terms(states, params, paths.grid.steps)))
    first = states[0]
    total += float(np.sum(initial_velocity_log_density(first, params)))
    if anchor is not None:
        total += float(np.sum(initial_location_log_density(first, anchor, location_var)))
    return total


def log_h(obs: ObservationSet, paths: PathSet, sigma_e2: float) -> float:
    """Log density of all observations given the latent paths."""
    return float(np.sum(observation_log_density(obs.obs, paths.states, sigma_e2)))


def log_joint_unnormalized(
    obs: ObservationSet,
    paths: PathSet,
    theta1: MovementParams,
    theta2: InteractionParams,
    interaction: Optional[InteractionFunction] = None,
    location_var: float = DEFAULT_LOCATION_VAR,
) -> float:
    """log(h * g * psi), omitting the normalising function.

    The first observations anchor the initial latent locations. Returns -inf
    when any pair is within the hard-core radius at any time.

    Raises:
        BreakpointError: If theta2 admits no breakpoints and no interaction is supplied
    """
    if interaction is None:
        interaction = AttractionRepulsion(theta2)
    return (
        log_h(obs, paths, theta1.sigma_e2)
        + log_g(paths, theta1, anchor=obs.obs[0], location_var=location_var)
        + log_weight_path(paths.locations(), interaction)
    )
