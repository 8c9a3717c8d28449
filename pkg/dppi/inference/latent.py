"""
Four-dimensional block Metropolis updates of the latent states.

Each site (time i, individual j) is updated with a Gaussian random-walk
proposal on (mu_x, v_x, mu_y, v_y) and accepted using only the terms that
involve it: the incoming transition (or the initial-state density at the
first time), the outgoing transition, the observation density when the
sweep conditions on observations, and the interaction of j with every other
individual at time i.

Two scan orders are provided. ``sequential``, the default, visits sites
time-major, then individual. ``checkerboard`` visits each individual in turn
and updates all of its even times together, then all of its odd times. Given
the rest of the panel those sites are conditionally independent, so the
vectorised update is a product of exact single-site updates.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..contracts.models import LOCATION_COLUMNS, MovementParams, TimeGrid
from ..interaction.attraction_repulsion import InteractionFunction
from ..motion.kernel import (
    StepTerms,
    correlate,
    initial_log_density,
    observation_log_density,
    step_terms,
    transition_cholesky,
    transition_log_density,
)
from .chain import ChainState

LATENT_TARGET_ACCEPT = 0.3


class LatentTarget:
    """Local log target of single sites under fixed parameters."""

    def __init__(
        self,
        params: MovementParams,
        interaction: InteractionFunction,
        grid: TimeGrid,
        anchor: np.ndarray,
        location_var: float,
        obs: Optional[np.ndarray] = None,
    ):
        self.params = params
        self.interaction = interaction
        self.anchor = anchor
        self.location_var = location_var
        self.obs = obs
        self.n = grid.n
        self.terms = step_terms(params.beta, grid.steps)
        # proposal shape follows the mean one-step noise of the walk
        mean_step = step_terms(params.beta, float(np.mean(grid.steps)))
        self.chol = tuple(float(c) for c in transition_cholesky(params, mean_step))

    def _terms_at(self, idx: np.ndarray) -> StepTerms:
        return StepTerms(*(a[idx] for a in self.terms))

    def log_local(self, states: np.ndarray, j: int, times: np.ndarray, values: np.ndarray) -> np.ndarray:
        """Log target of individual j at the given times taking the given (m, 4) values."""
        out = np.zeros(times.shape[0])
        first = times == 0
        if np.any(first):
            out[first] += initial_log_density(values[first], self.anchor[j], self.params, self.location_var)
        rest = ~first
        if np.any(rest):
            t = times[rest]
            out[rest] += transition_log_density(states[t - 1, j], values[rest], self.params, self._terms_at(t - 1))
        has_next = times < self.n - 1
        if np.any(has_next):
            t = times[has_next]
            out[has_next] += transition_log_density(values[has_next], states[t + 1, j], self.params, self._terms_at(t))
        if self.obs is not None:
            out += observation_log_density(self.obs[times, j], values, self.params.sigma_e2)
        k = states.shape[1]
        if k > 1:
            others = np.delete(states[times][:, :, LOCATION_COLUMNS], j, axis=1)
            d = np.linalg.norm(others - values[:, None, LOCATION_COLUMNS], axis=-1)
            out += np.sum(self.interaction.log_weight(d), axis=-1)
        return out


def _update_sites(
    states: np.ndarray,
    target: LatentTarget,
    j: int,
    times: np.ndarray,
    scale: float,
    rng: np.random.Generator,
) -> int:
    current = states[times, j]
    proposal = current + scale * correlate(rng.standard_normal(current.shape), target.chol)
    log_ratio = target.log_local(states, j, times, proposal) - target.log_local(states, j, times, current)
    # nan from an -inf current state rejects
    accept = np.log(rng.random(times.shape[0])) < log_ratio
    states[times[accept], j] = proposal[accept]
    return int(np.sum(accept))


def sweep(
    states: np.ndarray,
    target: LatentTarget,
    scale: float,
    rng: np.random.Generator,
    scan: str = "sequential",
) -> int:
    """One pass over every site of the (N, K, 4) panel, in place; returns acceptances."""
    n, k = states.shape[:2]
    accepted = 0
    if scan == "sequential":
        for i in range(n):
            times = np.array([i])
            for j in range(k):
                accepted += _update_sites(states, target, j, times, scale, rng)
    elif scan == "checkerboard":
        blocks = [np.arange(0, n, 2), np.arange(1, n, 2)]
        for j in range(k):
            for times in blocks:
                if times.size:
                    accepted += _update_sites(states, target, j, times, scale, rng)
    else:
        raise ValueError(f"Unknown scan order: {scan}")
    return accepted


def chain_target(chain: ChainState, with_obs: bool = True) -> LatentTarget:
    return LatentTarget(
        chain.movement,
        chain.interaction,
        chain.obs.grid,
        chain.anchor,
        chain.location_var,
        obs=chain.obs.obs if with_obs else None,
    )


def update_latent_states(chain: ChainState, rng: np.random.Generator, scan: str = "sequential") -> float:
    """One full latent sweep of the chain, conditioning on its observations.

    Returns:
        Fraction of site proposals accepted in this sweep
    """
    states = chain.paths.states
    accepted = sweep(states, chain_target(chain), chain.latent_scale, rng, scan=scan)
    sites = states.shape[0] * states.shape[1]
    chain.latent_accepted += accepted
    chain.latent_proposed += sites
    return accepted / sites
