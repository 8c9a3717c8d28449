"""
Posterior-predictive pointwise envelopes of K*.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from tqdm import tqdm

from ..contracts.errors import DomainError
from ..contracts.models import TimeGrid
from ..contracts.settings import settings
from ..inference.samplers import PosteriorSamples
from ..model.simulate import clear_hard_core, simulate_dppi, simulate_independent
from .kstar import kstar

logger = logging.getLogger(__name__)


class Envelope(BaseModel):
    """Pointwise lower and upper quantiles of simulated K* curves."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    distances: np.ndarray = Field(description="Distance grid")
    lower: np.ndarray = Field(description="Lower pointwise quantile")
    upper: np.ndarray = Field(description="Upper pointwise quantile")
    nsim: int = Field(ge=2, description="Number of simulated curves")
    level: float = Field(default=0.95, gt=0, lt=1, description="Nominal pointwise coverage")

    @field_validator("distances", "lower", "upper", mode="before")
    @classmethod
    def as_vector(cls, v) -> np.ndarray:
        return np.asarray(v, dtype=float).ravel()

    @model_validator(mode="after")
    def check_band(self) -> "Envelope":
        if not (self.distances.shape == self.lower.shape == self.upper.shape):
            raise ValueError("distances, lower and upper must have the same length")
        if np.any(self.lower > self.upper):
            raise ValueError("lower envelope exceeds upper envelope")
        return self

    def contains(self, counts) -> np.ndarray:
        counts = np.asarray(counts, dtype=float)
        return (counts >= self.lower) & (counts <= self.upper)


def envelope_from_curves(curves: np.ndarray, distances, level: float = 0.95) -> Envelope:
    """Pointwise equi-tailed band with linear interpolation between order statistics."""
    alpha = 1.0 - level
    lower, upper = np.quantile(curves, [alpha / 2.0, 1.0 - alpha / 2.0], axis=0, method="linear")
    return Envelope(distances=distances, lower=lower, upper=upper, nsim=curves.shape[0], level=level)


def _simulate_curve(task: tuple) -> np.ndarray:
    model, movement, iparams, start, grid, distances, inner_iters, observed, seed_seq = task
    rng = np.random.default_rng(seed_seq)
    if model == "dppi":
        paths, obs = simulate_dppi(start, movement, iparams, grid, inner_iters=inner_iters, rng=rng)
    else:
        paths, obs = simulate_independent(start, movement, grid, rng=rng)
    return kstar(obs if observed else paths, distances).counts


def posterior_predictive_envelope(
    samples: PosteriorSamples,
    model: Literal["independent", "dppi"],
    init: np.ndarray,
    grid: TimeGrid,
    distances,
    nsim: int = 100,
    rng: Optional[np.random.Generator] = None,
    inner_iters: int = 200,
    level: float = 0.95,
    observed: bool = True,
    workers: Optional[int] = None,
) -> Envelope:
    """Envelope of K* over paths simulated at posterior draws.

    Each replicate picks a retained draw uniformly at random, simulates from
    the (K, 2) start locations on the data's grid and computes K* on the
    simulated observations, or on the latent locations when ``observed`` is
    false. Replicates run in a process pool with spawned seed streams and are
    reduced in task order.

    Raises:
        DomainError: If nsim < 2 or there are no draws
    """
    if nsim < 2:
        raise DomainError("BAD_CONFIG", f"an envelope needs at least two simulations, got {nsim}")
    if samples.n == 0:
        raise DomainError("BAD_CONFIG", "no posterior draws to simulate from")
    if model == "dppi" and "theta1" not in samples.names:
        raise DomainError("BAD_CONFIG", "draws from the independent model cannot drive the interacting simulator")
    rng = rng if rng is not None else np.random.default_rng()
    distances = np.asarray(distances, dtype=float)
    start = np.asarray(init, dtype=float)
    if model == "dppi":
        start = clear_hard_core(start, samples.radius)

    rows = rng.integers(0, samples.n, size=nsim)
    seeds = np.random.SeedSequence(int(rng.integers(2**63))).spawn(nsim)
    tasks = []
    for row, seed in zip(rows, seeds):
        movement, iparams = samples.params_at(int(row))
        tasks.append((model, movement, iparams, start, grid, distances, inner_iters, observed, seed))

    workers = workers or settings.workers
    logger.info("simulating %d %s replicates on %d worker(s)", nsim, model, workers)
    if workers <= 1:
        curves = [_simulate_curve(t) for t in tqdm(tasks, desc="envelope", disable=not settings.progress)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            curves = list(
                tqdm(pool.map(_simulate_curve, tasks), total=nsim, desc="envelope", disable=not settings.progress)
            )
    return envelope_from_curves(np.array(curves, dtype=float), distances, level=level)
