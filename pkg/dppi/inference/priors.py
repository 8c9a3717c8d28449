"""
Prior distributions of the movement and interaction parameters.

Each parameter gets its own prior descriptor: normal for the drifts,
lower-truncated normal for the rates and variances as well as theta1 and
theta2, and uniform for theta3. The theta2 prior depends on the hard-core
radius, which is estimated from the data before a fit starts.
"""

from __future__ import annotations

import math
from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.stats import norm, truncnorm

from ..contracts.errors import DomainError
from ..contracts.models import (
    ALL_PARAMETERS,
    INTERACTION_PARAMETERS,
    MOVEMENT_PARAMETERS,
    InteractionParams,
    MovementParams,
    ObservationSet,
)
from ..interaction.attraction_repulsion import pair_distances

VAGUE_VARIANCE = 1e4


class NormalPrior(BaseModel):
    """Normal prior N(mean, var)."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["normal"] = "normal"
    mean: float = Field(default=0.0, description="Prior mean")
    var: float = Field(default=VAGUE_VARIANCE, gt=0, description="Prior variance")

    def log_density(self, x: float) -> float:
        return float(norm.logpdf(x, loc=self.mean, scale=math.sqrt(self.var)))

    def location(self) -> float:
        return self.mean


class TruncatedNormalPrior(BaseModel):
    """Normal prior N(mean, var) restricted to (lower, inf)."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["truncated_normal"] = "truncated_normal"
    mean: float = Field(description="Mean of the untruncated normal")
    var: float = Field(default=VAGUE_VARIANCE, gt=0, description="Variance of the untruncated normal")
    lower: float = Field(description="Lower bound B_L (excluded)")

    def log_density(self, x: float) -> float:
        if not x > self.lower:
            return -math.inf
        sd = math.sqrt(self.var)
        a = (self.lower - self.mean) / sd
        return float(truncnorm.logpdf(x, a, np.inf, loc=self.mean, scale=sd))

    def location(self) -> float:
        return self.mean if self.mean > self.lower else self.lower + 1.0


class UniformPrior(BaseModel):
    """Uniform prior on the open interval (low, high)."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["uniform"] = "uniform"
    low: float = Field(default=0.0, description="Lower end")
    high: float = Field(default=1.0, description="Upper end")

    @model_validator(mode="after")
    def check_interval(self) -> "UniformPrior":
        if not self.high > self.low:
            raise ValueError(f"uniform prior needs low < high, got ({self.low}, {self.high})")
        return self

    def log_density(self, x: float) -> float:
        if not self.low < x < self.high:
            return -math.inf
        return -math.log(self.high - self.low)

    def location(self) -> float:
        return 0.5 * (self.low + self.high)


Prior = Annotated[Union[NormalPrior, TruncatedNormalPrior, UniformPrior], Field(discriminator="kind")]


def _positive() -> TruncatedNormalPrior:
    return TruncatedNormalPrior(mean=1.0, lower=0.0)


class PriorSpec(BaseModel):
    """Prior descriptor for every parameter plus the fixed hard-core radius.

    ``theta2`` and ``radius`` may be left unset; ``resolve`` fills them from
    the radius estimated on the data, giving theta2 ~ truncN(R + 1, 1e4, R).
    """

    model_config = ConfigDict(frozen=True)

    beta: Prior = Field(default_factory=_positive)
    gamma1: Prior = Field(default_factory=NormalPrior)
    gamma2: Prior = Field(default_factory=NormalPrior)
    sigma2: Prior = Field(default_factory=_positive)
    sigma_e2: Prior = Field(default_factory=_positive)
    theta1: Prior = Field(default_factory=lambda: TruncatedNormalPrior(mean=2.0, lower=1.0))
    theta2: Optional[Prior] = Field(default=None, description="Defaults to truncN(R + 1, 1e4, R)")
    theta3: Prior = Field(default_factory=UniformPrior)
    radius: Optional[float] = Field(default=None, ge=0, description="Hard-core radius; estimated when unset")

    def resolve(self, radius: float) -> "PriorSpec":
        """Fix the hard-core radius unless one is already set and fill the theta2 default."""
        r = self.radius if self.radius is not None else float(radius)
        theta2 = self.theta2 if self.theta2 is not None else TruncatedNormalPrior(mean=r + 1.0, lower=r)
        return self.model_copy(update={"radius": r, "theta2": theta2})

    def component(self, name: str):
        if name not in ALL_PARAMETERS:
            raise KeyError(name)
        prior = getattr(self, name)
        if prior is None:
            raise DomainError("BAD_CONFIG", f"prior for {name} is unresolved; call resolve() first")
        return prior


def prior_log_density(params: MovementParams, iparams: InteractionParams, spec: PriorSpec) -> float:
    """Sum of component log-priors; -inf outside any support."""
    if spec.theta2 is None:
        spec = spec.resolve(iparams.radius)
    total = 0.0
    for name in MOVEMENT_PARAMETERS:
        total += spec.component(name).log_density(getattr(params, name))
    for name in INTERACTION_PARAMETERS:
        total += spec.component(name).log_density(getattr(iparams, name))
    return total


def estimate_hardcore_radius(obs: ObservationSet) -> float:
    """Minimum observed pairwise distance over all times and pairs.

    Raises:
        DomainError: If fewer than two individuals are observed
    """
    if obs.k < 2:
        raise DomainError("TOO_FEW_INDIVIDUALS", "the hard-core radius needs at least two individuals")
    return float(np.min(pair_distances(obs.obs)))
