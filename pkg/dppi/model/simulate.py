"""
Forward simulators for the independent and interacting group models.

The interacting simulator moves forward in time. At each step it samples the
whole group from the tilted transition

    p(A_i | A_{i-1}) ∝ prod_k f(alpha_ik | alpha_{i-1,k}) * prod_{j<k} psi(delta_jk)

with an inner Metropolis chain that updates one individual at a time,
starting from an independent-model draw. Observations are then drawn exactly
given the latent states.
"""

from __future__ import annotations

import logging
import math
from typing import Optional, Sequence, Union

import numpy as np

from ..contracts.errors import SimulationError
from ..contracts.models import (
    LOCATION_COLUMNS,
    InteractionParams,
    MovementParams,
    ObservationSet,
    PathSet,
    State,
    TimeGrid,
)
from ..interaction.attraction_repulsion import (
    AttractionRepulsion,
    InteractionFunction,
    log_weight_path,
    pair_distances,
)
from ..motion.kernel import (
    StepTerms,
    correlate,
    sample_initial_velocities,
    sample_observations,
    sample_transition,
    step_terms,
    transition_cholesky,
    transition_mean,
)

logger = logging.getLogger(__name__)

INNER_TARGET_ACCEPT = 0.3
MAX_WARMUP_SWEEPS = 50

StartLike = Union[Sequence[State], np.ndarray]


def initial_states(init: StartLike, params: MovementParams, rng: np.random.Generator) -> np.ndarray:
    """Turn States, (K, 4) states or (K, 2) locations into a (K, 4) start.

    Bare locations are completed with stationary velocities.
    """
    if not isinstance(init, np.ndarray):
        init = np.array([s.as_array() for s in init], dtype=float)
    init = np.asarray(init, dtype=float)
    if init.ndim != 2 or init.shape[1] not in (2, 4):
        raise ValueError(f"start must have shape (K, 2) or (K, 4), got {init.shape}")
    if init.shape[1] == 2:
        return sample_initial_velocities(init, params, rng)
    return init.copy()


def clear_hard_core(locations: np.ndarray, radius: float, factor: float = 1.0 + 1e-6) -> np.ndarray:
    """Dilate every (..., K, 2) slice with a pair at or inside radius about its centroid.

    Slices are dilated repeatedly by factor until every pair is strictly
    farther apart than radius; other slices are returned unchanged.
    """
    out = np.array(locations, dtype=float)
    if out.shape[-2] < 2:
        return out
    flat = out.reshape(-1, out.shape[-2], 2)
    for s in range(flat.shape[0]):
        while np.min(pair_distances(flat[s])) <= radius:
            centroid = flat[s].mean(axis=0)
            if np.min(pair_distances(flat[s])) == 0.0:
                raise SimulationError("HARDCORE_VIOLATION", "coincident locations cannot be separated by dilation")
            flat[s] = centroid + factor * (flat[s] - centroid)
    return flat.reshape(out.shape)


def _step(terms: StepTerms, j: int) -> StepTerms:
    return StepTerms(*(a[j] for a in terms))


def simulate_independent(
    init: StartLike,
    params: MovementParams,
    grid: TimeGrid,
    rng: Optional[np.random.Generator] = None,
) -> tuple[PathSet, ObservationSet]:
    """Exact forward simulation with every individual moving independently."""
    rng = rng if rng is not None else np.random.default_rng()
    start = initial_states(init, params, rng)
    states = np.empty((grid.n, start.shape[0], 4))
    states[0] = start
    terms = step_terms(params.beta, grid.steps)
    for i in range(1, grid.n):
        states[i] = sample_transition(states[i - 1], params, _step(terms, i - 1), rng)
    obs = sample_observations(states, params.sigma_e2, rng)
    return PathSet(states=states, grid=grid), ObservationSet(obs=obs, grid=grid)


class SliceSampler:
    """Inner Metropolis chain on one time slice of the tilted transition."""

    def __init__(
        self,
        prev: np.ndarray,
        params: MovementParams,
        terms: StepTerms,
        interaction: InteractionFunction,
    ):
        self.interaction = interaction
        self.mean = transition_mean(prev, params, terms)
        s2 = params.sigma2
        c00, c01, c11 = (float(s2 * terms.v1), float(s2 * terms.v3), float(s2 * terms.v2))
        det = c00 * c11 - c01 * c01
        self.p00, self.p01, self.p11 = c11 / det, -c01 / det, c00 / det
        self.chol = tuple(float(c) for c in transition_cholesky(params, terms))

    def log_transition(self, k: int, x: np.ndarray) -> float:
        r = x - self.mean[k]
        return -0.5 * (
            self.p00 * r[0] * r[0] + 2.0 * self.p01 * r[0] * r[1] + self.p11 * r[1] * r[1]
            + self.p00 * r[2] * r[2] + 2.0 * self.p01 * r[2] * r[3] + self.p11 * r[3] * r[3]
        )

    def log_weight(self, k: int, x: np.ndarray, group: np.ndarray) -> float:
        d = np.hypot(group[:, 0] - x[0], group[:, 2] - x[2])
        d[k] = np.inf
        return float(np.sum(self.interaction.log_weight(d)))

    def noise(self, z: np.ndarray) -> np.ndarray:
        return correlate(z, self.chol)

    def run(
        self, start: np.ndarray, sweeps: int, rng: np.random.Generator, warmup: int = 0, scale: float = 1.0
    ) -> tuple[np.ndarray, float]:
        """Run the chain from start; returns the final slice and the frozen scale."""
        x = start.copy()
        k_count = x.shape[0]
        log_f = [self.log_transition(k, x[k]) for k in range(k_count)]
        for sweep in range(sweeps):
            z = rng.standard_normal((k_count, 4))
            log_u = np.log(rng.random(k_count))
            accepted = 0
            for k in range(k_count):
                cand = x[k] + scale * self.noise(z[k])
                lf = self.log_transition(k, cand)
                lw_new = self.log_weight(k, cand, x)
                lw_old = self.log_weight(k, x[k], x)
                if lw_old == -np.inf:
                    # moves out of the hard core are always taken
                    log_ratio = np.inf if lw_new > -np.inf else lf - log_f[k]
                else:
                    log_ratio = lf + lw_new - log_f[k] - lw_old
                if log_u[k] < log_ratio:
                    x[k] = cand
                    log_f[k] = lf
                    accepted += 1
            if sweep < warmup:
                scale *= math.exp(accepted / k_count - INNER_TARGET_ACCEPT)
        return x, scale


def simulate_dppi(
    init: StartLike,
    params: MovementParams,
    iparams: InteractionParams,
    grid: TimeGrid,
    inner_iters: int = 200,
    rng: Optional[np.random.Generator] = None,
    interaction: Optional[InteractionFunction] = None,
) -> tuple[PathSet, ObservationSet]:
    """Simulate the interacting group model forward in time.

    Args:
        init: Start states or locations; pairwise distances must exceed R
        params: Movement parameters
        iparams: Interaction parameters
        grid: Observation instants
        inner_iters: Sweeps of the per-step inner Metropolis chain
        rng: Random stream
        interaction: Override of the interaction seam (e.g. a neutral one)

    Returns:
        Latent paths and observations

    Raises:
        BreakpointError: If the interaction parameters admit no breakpoints
        SimulationError: If the start or a simulated step stays inside the hard core
    """
    rng = rng if rng is not None else np.random.default_rng()
    if interaction is None:
        interaction = AttractionRepulsion(iparams)
    start = initial_states(init, params, rng)
    if not np.isfinite(log_weight_path(start[None, :, LOCATION_COLUMNS], interaction)):
        raise SimulationError("HARDCORE_VIOLATION", "start configuration has a pair within the hard-core radius")

    states = np.empty((grid.n, start.shape[0], 4))
    states[0] = start
    terms = step_terms(params.beta, grid.steps)
    warmup = min(MAX_WARMUP_SWEEPS, inner_iters // 4)
    for i in range(1, grid.n):
        sampler = SliceSampler(states[i - 1], params, _step(terms, i - 1), interaction)
        proposal = sample_transition(states[i - 1], params, _step(terms, i - 1), rng)
        current, scale = sampler.run(proposal, inner_iters, rng, warmup=warmup)
        if not np.isfinite(log_weight_path(current[None, :, LOCATION_COLUMNS], interaction)):
            logger.warning("step %d still inside the hard core after %d sweeps; extending", i, inner_iters)
            current, _ = sampler.run(current, max(inner_iters, 1), rng, scale=scale)
            if not np.isfinite(log_weight_path(current[None, :, LOCATION_COLUMNS], interaction)):
                raise SimulationError("HARDCORE_VIOLATION", f"step {i} could not leave the hard core")
        states[i] = current
    obs = sample_observations(states, params.sigma_e2, rng)
    return PathSet(states=states, grid=grid), ObservationSet(obs=obs, grid=grid)
