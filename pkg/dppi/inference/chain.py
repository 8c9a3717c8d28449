"""
Chain configuration and mutable sampler state.
"""

from __future__ import annotations

import logging
import math
from typing import Any, Dict, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..contracts.errors import BreakpointError, ChainError
from ..contracts.models import (
    ALL_PARAMETERS,
    INTERACTION_PARAMETERS,
    LOCATION_COLUMNS,
    MOVEMENT_PARAMETERS,
    InteractionParams,
    MovementParams,
    ObservationSet,
    PathSet,
)
from ..interaction.attraction_repulsion import (
    InteractionFunction,
    NeutralInteraction,
    log_weight_path,
    make_interaction,
)
from ..model.joint import DEFAULT_LOCATION_VAR, log_g, log_h
from ..model.simulate import clear_hard_core
from .priors import PriorSpec, estimate_hardcore_radius

logger = logging.getLogger(__name__)

DEFAULT_PROPOSAL_SCALES: Dict[str, float] = {
    "beta": 0.02,
    "gamma1": 0.2,
    "gamma2": 0.2,
    "sigma2": 0.1,
    "sigma_e2": 0.02,
    "theta1": 2.0,
    "theta2": 1.0,
    "theta3": 0.1,
}


class ChainConfig(BaseModel):
    """Lengths, proposal scales and switches of one MCMC run."""

    model_config = ConfigDict(frozen=True)

    iterations: int = Field(default=10000, gt=0, description="Total iterations, burn-in included")
    burn_in: int = Field(default=1000, ge=0, description="Iterations discarded and used for adaptation")
    nested_length: int = Field(default=200, ge=0, description="Sweeps of the nested auxiliary chain")
    inner_sim_iters: int = Field(default=200, ge=1, description="Inner sweeps per step of the DPPI simulator")
    proposal_scales: Dict[str, float] = Field(
        default_factory=lambda: dict(DEFAULT_PROPOSAL_SCALES),
        description="Random-walk standard deviation per parameter",
    )
    latent_scale: float = Field(default=0.5, gt=0, description="Multiplier on the latent-state proposal")
    adapt: bool = Field(default=True, description="Robbins-Monro scaling during burn-in")
    seed: int = Field(default=0, ge=0, description="Seed used when no random stream is supplied")
    thinning: int = Field(default=1, ge=1, description="Keep every n-th post-burn-in draw")
    fixed: Dict[str, float] = Field(default_factory=dict, description="Parameters pinned to a value")
    interaction: Literal["attraction_repulsion", "neutral"] = Field(default="attraction_repulsion")
    exact_sigma_e2: bool = Field(default=False, description="Plain MH update for sigma_e2 instead of double MH")
    scan: Literal["checkerboard", "sequential"] = Field(
        default="sequential", description="Order of the latent-state sweep; checkerboard vectorises over time"
    )
    initial_location_var: float = Field(default=DEFAULT_LOCATION_VAR, gt=0)
    keep_paths: int = Field(default=0, ge=0, description="Latent path snapshots retained after burn-in")

    @field_validator("proposal_scales")
    @classmethod
    def validate_scales(cls, v: Dict[str, float]) -> Dict[str, float]:
        unknown = set(v) - set(ALL_PARAMETERS)
        if unknown:
            raise ValueError(f"Unknown parameters in proposal_scales: {sorted(unknown)}")
        if any(not s > 0 for s in v.values()):
            raise ValueError("proposal scales must be positive")
        return {**DEFAULT_PROPOSAL_SCALES, **v}

    @field_validator("fixed")
    @classmethod
    def validate_fixed(cls, v: Dict[str, float]) -> Dict[str, float]:
        unknown = set(v) - set(ALL_PARAMETERS)
        if unknown:
            raise ValueError(f"Unknown parameters in fixed: {sorted(unknown)}")
        return v

    @model_validator(mode="after")
    def check_burn_in(self) -> "ChainConfig":
        if not self.burn_in < self.iterations:
            raise ValueError(f"burn_in={self.burn_in} must be smaller than iterations={self.iterations}")
        return self

    def free_parameters(self, names) -> list:
        return [n for n in names if n not in self.fixed]


class ChainState(BaseModel):
    """Current parameters, latent paths and acceptance bookkeeping of one chain."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    movement: MovementParams
    iparams: InteractionParams
    interaction: Any = Field(description="InteractionFunction evaluating log psi")
    paths: PathSet
    obs: ObservationSet
    location_var: float = DEFAULT_LOCATION_VAR
    scales: Dict[str, float] = Field(default_factory=dict)
    latent_scale: float = 1.0
    accepted: Dict[str, int] = Field(default_factory=dict)
    proposed: Dict[str, int] = Field(default_factory=dict)
    latent_accepted: int = 0
    latent_proposed: int = 0

    @property
    def anchor(self) -> np.ndarray:
        """First observations, the centre of the initial location density."""
        return self.obs.obs[0]

    def log_joint(self) -> float:
        return (
            log_h(self.obs, self.paths, self.movement.sigma_e2)
            + log_g(self.paths, self.movement, anchor=self.anchor, location_var=self.location_var)
            + log_weight_path(self.paths.locations(), self.interaction)
        )

    def record(self, name: str, accepted: bool) -> None:
        self.proposed[name] = self.proposed.get(name, 0) + 1
        self.accepted[name] = self.accepted.get(name, 0) + int(accepted)

    def reset_counters(self) -> None:
        self.accepted, self.proposed = {}, {}
        self.latent_accepted = self.latent_proposed = 0

    def acceptance_rates(self) -> Dict[str, float]:
        return {n: self.accepted.get(n, 0) / p for n, p in self.proposed.items() if p > 0}

    def latent_acceptance(self) -> float:
        return self.latent_accepted / self.latent_proposed if self.latent_proposed else math.nan


def check_fixed(spec: PriorSpec, config: ChainConfig) -> None:
    """Reject fixed values the resolved prior gives zero density.

    Raises:
        ChainError: BAD_CONFIG naming the first offending parameter
    """
    for name in ALL_PARAMETERS:
        if name in config.fixed and spec.component(name).log_density(config.fixed[name]) == -math.inf:
            raise ChainError(
                "BAD_CONFIG", f"fixed {name}={config.fixed[name]} lies outside the support of its prior"
            )


def init_chain(
    obs: ObservationSet,
    spec: PriorSpec,
    config: ChainConfig,
    interaction: Optional[str] = None,
) -> tuple[ChainState, PriorSpec]:
    """Start a chain at the prior locations with latent states on the observations.

    Velocities start at zero. Time slices with a pair at or inside the
    hard-core radius are dilated about their centroid until they clear it.

    Returns:
        The chain and the prior spec resolved against the hard-core radius

    Raises:
        ChainError: If a fixed value lies outside its prior or the starting log
            density is not finite
    """
    kind = interaction or config.interaction
    radius = estimate_hardcore_radius(obs) if obs.k >= 2 else 0.0
    spec = spec.resolve(radius)
    radius = spec.radius
    check_fixed(spec, config)

    values = {name: spec.component(name).location() for name in ALL_PARAMETERS}
    values.update(config.fixed)
    try:
        movement = MovementParams(**{n: values[n] for n in MOVEMENT_PARAMETERS})
        iparams = InteractionParams(radius=radius, **{n: values[n] for n in INTERACTION_PARAMETERS})
        seam: InteractionFunction = make_interaction(kind, iparams)
    except (ValueError, BreakpointError) as e:
        raise ChainError("BAD_CONFIG", f"invalid starting parameters: {e}") from e

    states = np.zeros((obs.n, obs.k, 4))
    locations = obs.obs
    if not isinstance(seam, NeutralInteraction):
        locations = clear_hard_core(locations, radius)
    states[:, :, LOCATION_COLUMNS] = locations

    chain = ChainState(
        movement=movement,
        iparams=iparams,
        interaction=seam,
        paths=PathSet(states=states, grid=obs.grid),
        obs=obs,
        location_var=config.initial_location_var,
        scales=dict(config.proposal_scales),
        latent_scale=config.latent_scale,
    )
    start = chain.log_joint()
    if not np.isfinite(start):
        raise ChainError("NON_FINITE_START", f"starting log density is {start}")
    logger.info(
        "chain start: K=%d N=%d R=%.6g interaction=%s log joint=%.6g", obs.k, obs.n, radius, kind, start
    )
    return chain, spec
