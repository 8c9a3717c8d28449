"""
MCMC samplers for the independent and the interacting group model.

Both samplers alternate one latent-state sweep with variable-at-a-time
random-walk updates of the parameters in the order beta, gamma1, gamma2,
sigma2, sigma_e2, theta1, theta2, theta3. The independent model's
parameters get standard Metropolis-Hastings updates. The interacting model's
likelihood carries the normalising function c(theta), so each parameter is
updated by double Metropolis-Hastings: an auxiliary panel Y* is simulated at
the proposed parameters by a nested chain started at the current latent
states, and the acceptance ratio

    q(Y | theta') p(theta') q(Y* | theta)
    -------------------------------------
    q(Y | theta)  p(theta)  q(Y* | theta')

uses only unnormalised joint densities q = h * g * psi.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from tqdm import tqdm

from ..contracts.errors import BreakpointError, ChainError
from ..contracts.models import (
    ALL_PARAMETERS,
    INTERACTION_PARAMETERS,
    MOVEMENT_PARAMETERS,
    InteractionParams,
    MovementParams,
    ObservationSet,
    PathSet,
)
from ..contracts.settings import settings
from ..interaction.attraction_repulsion import (
    InteractionFunction,
    NeutralInteraction,
    log_weight_path,
    make_interaction,
    pair_distances,
)
from ..model.joint import log_g, log_h
from ..motion.kernel import observation_log_density, sample_observations
from .chain import ChainConfig, ChainState, check_fixed, init_chain
from .latent import LATENT_TARGET_ACCEPT, LatentTarget, sweep, update_latent_states
from .priors import PriorSpec, estimate_hardcore_radius, prior_log_density

logger = logging.getLogger(__name__)

PARAMETER_TARGET_ACCEPT = 0.44
ADAPTATION_DECAY = 0.6
ACCEPTANCE_BAND = (0.05, 0.8)

ModelKind = Literal["independent", "dppi"]


class PosteriorSamples(BaseModel):
    """Retained draws of one chain, one row per kept iteration."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    draws: np.ndarray = Field(description="Array (iterations, parameters)")
    names: List[str] = Field(description="Parameter name of each column")
    acceptance: Dict[str, float] = Field(default_factory=dict, description="Post-burn-in acceptance rates")
    latent_acceptance: float = Field(default=math.nan, description="Post-burn-in latent acceptance rate")
    radius: float = Field(ge=0, description="Hard-core radius used throughout the run")
    model: ModelKind = Field(description="Model the chain targeted")
    chain_id: int = Field(default=0, ge=0)
    burn_in: int = Field(default=0, ge=0, description="Iterations discarded before the first row")
    thinning: int = Field(default=1, ge=1)
    proposal_scales: Dict[str, float] = Field(default_factory=dict, description="Scales frozen after burn-in")
    paths: Optional[np.ndarray] = Field(default=None, description="Latent snapshots (S, N, K, 4)")

    @field_validator("draws", mode="before")
    @classmethod
    def validate_draws(cls, v) -> np.ndarray:
        arr = np.array(v, dtype=float)
        if arr.ndim != 2:
            raise ValueError(f"draws must be two-dimensional, got shape {arr.shape}")
        return arr

    @model_validator(mode="after")
    def check_columns(self) -> "PosteriorSamples":
        if self.draws.shape[1] != len(self.names):
            raise ValueError(f"{self.draws.shape[1]} columns but {len(self.names)} names")
        return self

    @property
    def n(self) -> int:
        return self.draws.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.draws[:, self.names.index(name)]

    def params_at(self, row: int) -> tuple[MovementParams, Optional[InteractionParams]]:
        """Parameter objects of one retained draw."""
        values = dict(zip(self.names, (float(v) for v in self.draws[row])))
        movement = MovementParams(**{n: values[n] for n in MOVEMENT_PARAMETERS})
        if not all(n in values for n in INTERACTION_PARAMETERS):
            return movement, None
        iparams = InteractionParams(radius=self.radius, **{n: values[n] for n in INTERACTION_PARAMETERS})
        return movement, iparams


def _log_q(
    obs: np.ndarray,
    states: np.ndarray,
    movement: MovementParams,
    interaction: InteractionFunction,
    chain: ChainState,
) -> float:
    """Unnormalised log joint of an (obs, states) pair with the chain's grid and anchor."""
    paths = PathSet.model_construct(states=states, grid=chain.obs.grid)
    return (
        float(np.sum(observation_log_density(obs, states, movement.sigma_e2)))
        + log_g(paths, movement, anchor=chain.anchor, location_var=chain.location_var)
        + log_weight_path(states[:, :, [0, 2]], interaction)
    )


def _propose(
    name: str, chain: ChainState, rng: np.random.Generator
) -> Optional[tuple[MovementParams, InteractionParams]]:
    """Random-walk proposal for one parameter; None when it leaves the structural support."""
    if name in MOVEMENT_PARAMETERS:
        value = getattr(chain.movement, name) + chain.scales[name] * rng.standard_normal()
        try:
            return MovementParams(**{**chain.movement.model_dump(), name: value}), chain.iparams
        except ValidationError:
            return None
    value = getattr(chain.iparams, name) + chain.scales[name] * rng.standard_normal()
    try:
        return chain.movement, InteractionParams(**{**chain.iparams.model_dump(), name: value})
    except ValidationError:
        return None


def _adapt(chain: ChainState, name: str, accepted: bool, iteration: int) -> None:
    step = (iteration + 1) ** -ADAPTATION_DECAY
    chain.scales[name] *= math.exp(step * (float(accepted) - PARAMETER_TARGET_ACCEPT))


def mh_update(name: str, chain: ChainState, spec: PriorSpec, rng: np.random.Generator) -> bool:
    """Standard MH update of one movement parameter under the independent model."""
    proposal = _propose(name, chain, rng)
    if proposal is None:
        chain.record(name, False)
        return False
    movement, _ = proposal
    log_prior = spec.component(name).log_density(getattr(movement, name))
    if log_prior == -math.inf:
        chain.record(name, False)
        return False
    log_ratio = log_prior - spec.component(name).log_density(getattr(chain.movement, name))
    if name == "sigma_e2":
        log_ratio += log_h(chain.obs, chain.paths, movement.sigma_e2) - log_h(
            chain.obs, chain.paths, chain.movement.sigma_e2
        )
    else:
        anchor, var = chain.anchor, chain.location_var
        log_ratio += log_g(chain.paths, movement, anchor, var) - log_g(chain.paths, chain.movement, anchor, var)
    accepted = bool(math.log(rng.random()) < log_ratio)
    if accepted:
        chain.movement = movement
    chain.record(name, accepted)
    return accepted


def nested_auxiliary_sample(
    movement: MovementParams,
    iparams: InteractionParams,
    chain: ChainState,
    length: int,
    need_obs: bool,
    rng: np.random.Generator,
    interaction: Optional[InteractionFunction] = None,
    scan: str = "sequential",
) -> tuple[PathSet, Optional[ObservationSet]]:
    """Simulate the auxiliary panel at the given parameters.

    Runs ``length`` latent sweeps targeting g * psi (no observation term),
    started at the chain's current latent states. With ``need_obs`` the
    auxiliary observations are then drawn exactly from h.
    """
    if interaction is None:
        interaction = make_interaction(
            "neutral" if isinstance(chain.interaction, NeutralInteraction) else "attraction_repulsion", iparams
        )
    states = chain.paths.states.copy()
    if length > 0:
        target = LatentTarget(movement, interaction, chain.obs.grid, chain.anchor, chain.location_var)
        for _ in range(length):
            sweep(states, target, chain.latent_scale, rng, scan=scan)
    paths = PathSet.model_construct(states=states, grid=chain.obs.grid)
    if not need_obs:
        return paths, None
    obs = sample_observations(states, movement.sigma_e2, rng)
    return paths, ObservationSet.model_construct(obs=obs, grid=chain.obs.grid, ids=chain.obs.ids)


def double_mh_update(
    name: str, chain: ChainState, spec: PriorSpec, config: ChainConfig, rng: np.random.Generator
) -> bool:
    """Double Metropolis-Hastings update of one parameter.

    Proposals outside the support, or whose breakpoints cannot be solved, are
    rejected without simulating.
    """
    proposal = _propose(name, chain, rng)
    if proposal is None:
        chain.record(name, False)
        return False
    movement, iparams = proposal
    log_prior_new = prior_log_density(movement, iparams, spec)
    if log_prior_new == -math.inf:
        chain.record(name, False)
        return False
    if name in INTERACTION_PARAMETERS:
        try:
            interaction = make_interaction(config.interaction, iparams)
        except BreakpointError:
            chain.record(name, False)
            return False
    else:
        interaction = chain.interaction
    log_ratio = log_prior_new - prior_log_density(chain.movement, chain.iparams, spec)

    obs, states = chain.obs.obs, chain.paths.states
    if name == "sigma_e2" and config.exact_sigma_e2:
        log_ratio += float(np.sum(observation_log_density(obs, states, movement.sigma_e2))) - float(
            np.sum(observation_log_density(obs, states, chain.movement.sigma_e2))
        )
    else:
        need_obs = name == "sigma_e2"
        aux_paths, aux_obs = nested_auxiliary_sample(
            movement, iparams, chain, config.nested_length, need_obs, rng, interaction=interaction, scan=config.scan
        )
        aux_s = aux_obs.obs if aux_obs is not None else obs
        log_ratio += _log_q(obs, states, movement, interaction, chain) - _log_q(
            obs, states, chain.movement, chain.interaction, chain
        )
        log_ratio += _log_q(aux_s, aux_paths.states, chain.movement, chain.interaction, chain) - _log_q(
            aux_s, aux_paths.states, movement, interaction, chain
        )
    accepted = bool(math.log(rng.random()) < log_ratio)
    if accepted:
        chain.movement, chain.iparams, chain.interaction = movement, iparams, interaction
    chain.record(name, accepted)
    return accepted


def _run(
    model: ModelKind,
    obs: ObservationSet,
    spec: PriorSpec,
    config: ChainConfig,
    rng: np.random.Generator,
    chain_id: int = 0,
) -> PosteriorSamples:
    if model == "independent":
        chain, spec = init_chain(obs, spec, config, interaction="neutral")
        names = list(MOVEMENT_PARAMETERS)
    else:
        if obs.k < 2:
            raise ChainError("BAD_CONFIG", "the interacting model needs at least two individuals")
        chain, spec = init_chain(obs, spec, config)
        names = list(ALL_PARAMETERS)
    free = config.free_parameters(names)
    kept = (config.iterations - config.burn_in + config.thinning - 1) // config.thinning
    draws = np.empty((kept, len(names)))
    snapshot_every = max(1, kept // config.keep_paths) if config.keep_paths else 0
    snapshots = []

    logger.info(
        "fitting %s model (chain %d): K=%d N=%d iterations=%d burn-in=%d",
        model, chain_id, obs.k, obs.n, config.iterations, config.burn_in,
    )
    row = 0
    for it in tqdm(range(config.iterations), desc=f"{model} chain {chain_id}", disable=not settings.progress):
        rate = update_latent_states(chain, rng, scan=config.scan)
        for name in free:
            if model == "independent":
                accepted = mh_update(name, chain, spec, rng)
            else:
                accepted = double_mh_update(name, chain, spec, config, rng)
            if config.adapt and it < config.burn_in:
                _adapt(chain, name, accepted, it)
        if config.adapt and it < config.burn_in:
            chain.latent_scale *= math.exp((it + 1) ** -ADAPTATION_DECAY * (rate - LATENT_TARGET_ACCEPT))
        if it + 1 == config.burn_in:
            logger.info("adaptation frozen: latent=%.4g %s", chain.latent_scale, chain.scales)
            chain.reset_counters()
        if it >= config.burn_in and (it - config.burn_in) % config.thinning == 0:
            values = {**chain.movement.model_dump(), **chain.iparams.model_dump()}
            draws[row] = [values[n] for n in names]
            if snapshot_every and row % snapshot_every == 0 and len(snapshots) < config.keep_paths:
                snapshots.append(chain.paths.states.copy())
            row += 1

    acceptance = chain.acceptance_rates()
    for name, rate in acceptance.items():
        logger.debug("acceptance %s: %.3f", name, rate)
        if not ACCEPTANCE_BAND[0] < rate < ACCEPTANCE_BAND[1]:
            logger.warning("acceptance of %s is %.3f, outside %s", name, rate, ACCEPTANCE_BAND)
    return PosteriorSamples(
        draws=draws,
        names=names,
        acceptance=acceptance,
        latent_acceptance=chain.latent_acceptance(),
        radius=spec.radius,
        model=model,
        chain_id=chain_id,
        burn_in=config.burn_in,
        thinning=config.thinning,
        proposal_scales=dict(chain.scales),
        paths=np.array(snapshots) if snapshots else None,
    )


def fit_independent(
    obs: ObservationSet,
    spec: PriorSpec,
    config: ChainConfig,
    rng: Optional[np.random.Generator] = None,
) -> PosteriorSamples:
    """Variable-at-a-time MH for the movement parameters and latent states with no interaction.

    Raises:
        ChainError: If the starting log density is not finite
    """
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    return _run("independent", obs, spec, config, rng)


def fit_dppi(
    obs: ObservationSet,
    spec: PriorSpec,
    config: ChainConfig,
    rng: Optional[np.random.Generator] = None,
) -> PosteriorSamples:
    """Latent sweep plus eight double-MH parameter updates per iteration, R fixed at its estimate.

    Raises:
        ChainError: If fewer than two individuals are observed or the start is not finite
    """
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    return _run("dppi", obs, spec, config, rng)


def _run_task(task: tuple) -> PosteriorSamples:
    model, obs, spec, config, seed_seq, chain_id = task
    return _run(model, obs, spec, config, np.random.default_rng(seed_seq), chain_id=chain_id)


def fit_chains(
    model: ModelKind,
    obs: ObservationSet,
    spec: PriorSpec,
    config: ChainConfig,
    chains: int = 1,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> List[PosteriorSamples]:
    """Run independent chains from spawned seed streams, in a process pool when workers > 1."""
    check_fixed(spec.resolve(estimate_hardcore_radius(obs) if obs.k >= 2 else 0.0), config)
    children = np.random.SeedSequence(config.seed if seed is None else seed).spawn(chains)
    tasks = [(model, obs, spec, config, child, c) for c, child in enumerate(children)]
    workers = min(workers or settings.workers, chains)
    if workers <= 1:
        return [_run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_task, tasks))


def tune_nested_length(
    chain: ChainState,
    rng: np.random.Generator,
    start: int = 200,
    rel_tol: float = 0.05,
    max_length: int = 3200,
    scan: str = "sequential",
) -> int:
    """Double the nested length until the mean pairwise distance of S* stabilises.

    Returns the first length whose doubling changes that distance by less
    than ``rel_tol`` relative, or ``max_length``.
    """
    if start < 1:
        raise ChainError("BAD_CONFIG", "nested length tuning needs a positive start")

    def mean_distance(length: int) -> float:
        _, aux = nested_auxiliary_sample(
            chain.movement, chain.iparams, chain, length, True, rng, interaction=chain.interaction, scan=scan
        )
        return float(np.mean(pair_distances(aux.obs)))

    length = start
    previous = mean_distance(length)
    while length < max_length:
        current = mean_distance(2 * length)
        logger.info("nested length %d -> %d: mean distance %.4g -> %.4g", length, 2 * length, previous, current)
        if abs(current - previous) <= rel_tol * abs(previous):
            return length
        length, previous = 2 * length, current
    logger.warning("nested length did not stabilise below %d", max_length)
    return max_length
