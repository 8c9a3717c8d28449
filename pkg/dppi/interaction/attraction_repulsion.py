"""
Attraction-repulsion pairwise interaction function.

For a pairwise distance r the weight is

    psi(r) = 0                                  r <= R
    psi(r) = theta1 * (1 - ((r - theta2) / (theta2 - R))^2)   R < r < r1
    psi(r) = 1 + 1 / (theta3 * (r - r2))^2      r >= r1

so pairs closer than the hard-core radius R are forbidden, the weight peaks
at theta1 when r = theta2, and it decays towards independence (weight 1) at
large distances. The junction r1 and pole offset r2 make psi and its first
derivative continuous.
"""

from __future__ import annotations

import logging
from functools import lru_cache
from typing import Protocol, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import brentq
from scipy.spatial.distance import pdist

from ..contracts.errors import BreakpointError
from ..contracts.models import InteractionParams, PathSet, State

logger = logging.getLogger(__name__)

CONTINUITY_TOLERANCE = 1e-10


class Breakpoints(BaseModel):
    """Junction r1 and pole offset r2 solved from one parameter vector."""

    model_config = ConfigDict(frozen=True)

    r1: float = Field(description="Distance where the quadratic branch hands off to the tail")
    r2: float = Field(description="Pole offset of the tail branch")
    params: InteractionParams = Field(description="Parameters the breakpoints were solved from")


def _psi1(r, p: InteractionParams):
    span = p.theta2 - p.radius
    return p.theta1 * (1.0 - ((r - p.theta2) / span) ** 2)


def _dpsi1(r, p: InteractionParams):
    span = p.theta2 - p.radius
    return -2.0 * p.theta1 * (r - p.theta2) / span**2


def _psi2(r, p: InteractionParams, r2: float):
    return 1.0 + 1.0 / (p.theta3 * (r - r2)) ** 2


def _dpsi2(r, p: InteractionParams, r2: float):
    return -2.0 / (p.theta3**2 * (r - r2) ** 3)


def _pole_gap(offset: float, p: InteractionParams) -> float:
    """r1 - r2 implied by matching derivatives at r1 = theta2 + offset."""
    span = p.theta2 - p.radius
    return (span**2 / (p.theta1 * p.theta3**2 * offset)) ** (1.0 / 3.0)


def continuity_residuals(bp: Breakpoints) -> tuple[float, float]:
    """Absolute value and slope mismatch of the two branches at r1."""
    p = bp.params
    return (
        abs(_psi1(bp.r1, p) - _psi2(bp.r1, p, bp.r2)),
        abs(_dpsi1(bp.r1, p) - _dpsi2(bp.r1, p, bp.r2)),
    )


@lru_cache(maxsize=4096)
def _solve_cached(theta1: float, theta2: float, theta3: float, radius: float) -> Breakpoints:
    if not (theta1 > 1 and theta3 > 0 and theta2 > radius >= 0):
        raise BreakpointError(
            "NO_BREAKPOINTS",
            f"no valid breakpoints for theta=({theta1}, {theta2}, {theta3}), R={radius}"
        )
    p = InteractionParams.model_construct(theta1=theta1, theta2=theta2, theta3=theta3, radius=radius)
    span = theta2 - radius
    # psi2 > 1 forces psi1(r1) > 1, which bounds the offset of r1 past the peak.
    upper = span * np.sqrt((theta1 - 1.0) / theta1)

    def mismatch(offset: float) -> float:
        if offset <= 0.0:
            return theta1 - 1.0
        return _psi1(theta2 + offset, p) - 1.0 - 1.0 / (theta3 * _pole_gap(offset, p)) ** 2

    lo, hi = mismatch(0.0), mismatch(upper)
    if not (lo > 0.0 > hi):
        raise BreakpointError(
            "NO_BREAKPOINTS",
            f"no sign change on the breakpoint bracket for theta=({theta1}, {theta2}, {theta3}), R={radius}"
        )
    offset = brentq(mismatch, 0.0, upper, xtol=1e-15 * max(span, 1.0), rtol=4 * np.finfo(float).eps, maxiter=500)
    r1 = theta2 + offset
    bp = Breakpoints(r1=r1, r2=r1 - _pole_gap(offset, p), params=p)
    value_gap, slope_gap = continuity_residuals(bp)
    scale = max(1.0, theta1)
    if value_gap > CONTINUITY_TOLERANCE * scale or slope_gap > CONTINUITY_TOLERANCE * scale:
        raise BreakpointError("NO_BREAKPOINTS", f"breakpoint residuals too large: {value_gap:.3e}, {slope_gap:.3e}")
    logger.debug("breakpoints for %s: r1=%.6f r2=%.6f", p.key(), bp.r1, bp.r2)
    return bp


def solve_breakpoints(params: InteractionParams) -> Breakpoints:
    """Solve the continuity system for (r1, r2).

    Matching derivatives gives r2 = r1 - [(theta2 - R)^2 / (theta1 theta3^2 (r1 - theta2))]^(1/3);
    r1 is then the root of psi1(r1) - psi2(r1) on
    (theta2, theta2 + (theta2 - R) sqrt((theta1 - 1) / theta1)). Results are
    cached per parameter vector.

    Raises:
        BreakpointError: If the parameters admit no solution
    """
    return _solve_cached(*params.key())


def psi(r, params: InteractionParams, bp: Breakpoints) -> np.ndarray:
    """Interaction weight at distance(s) r. r == r1 uses the tail branch."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        body = _psi1(r, params)
        tail = _psi2(r, params, bp.r2)
    return np.where(r <= params.radius, 0.0, np.where(r < bp.r1, body, tail))


def log_psi(r, params: InteractionParams, bp: Breakpoints) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(psi(r, params, bp))


class InteractionFunction(Protocol):
    """Evaluation seam for pairwise interaction weights."""

    def log_weight(self, r: np.ndarray) -> np.ndarray: ...


class AttractionRepulsion:
    """Attraction-repulsion weights bound to solved breakpoints."""

    def __init__(self, params: InteractionParams):
        self.params = params
        self.breakpoints = solve_breakpoints(params)

    def log_weight(self, r: np.ndarray) -> np.ndarray:
        return log_psi(r, self.params, self.breakpoints)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.params.key()}, r1={self.breakpoints.r1:.4f})"


class NeutralInteraction:
    """Weight 1 at every distance: individuals move independently."""

    def log_weight(self, r: np.ndarray) -> np.ndarray:
        return np.zeros(np.shape(r))

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}()"


def make_interaction(kind: str, params: InteractionParams) -> InteractionFunction:
    """Build the interaction seam named by a run configuration."""
    if kind == "neutral":
        return NeutralInteraction()
    if kind == "attraction_repulsion":
        return AttractionRepulsion(params)
    raise ValueError(f"Unknown interaction kind: {kind}")


def pair_distances(locations: np.ndarray) -> np.ndarray:
    """Distances of all unordered pairs, over the last two axes (K, 2).

    A single (K, 2) configuration returns a condensed vector of length
    K(K-1)/2; a stack (..., K, 2) returns (..., K(K-1)/2).
    """
    locations = np.asarray(locations, dtype=float)
    if locations.ndim == 2:
        return pdist(locations)
    k = locations.shape[-2]
    iu, ju = np.triu_indices(k, 1)
    diff = locations[..., iu, :] - locations[..., ju, :]
    return np.sqrt(np.sum(diff**2, axis=-1))


def _as_locations(states: Union[Sequence[State], np.ndarray]) -> np.ndarray:
    if isinstance(states, np.ndarray):
        return states[..., [0, 2]]
    return np.array([[s.mu_x, s.mu_y] for s in states], dtype=float).reshape(-1, 2)


def log_interaction_at_time(
    states: Union[Sequence[State], np.ndarray], params: InteractionParams, bp: Breakpoints
) -> float:
    """Sum of log psi over all unordered pairs at one time; -inf inside the hard core."""
    loc = _as_locations(states)
    if loc.shape[0] < 2:
        return 0.0
    return float(np.sum(log_psi(pair_distances(loc), params, bp)))


class AttractionRepulsionView(AttractionRepulsion):
    """Seam wrapper over already solved breakpoints."""

    def __init__(self, params: InteractionParams, bp: Breakpoints):
        self.params = params
        self.breakpoints = bp


def log_interaction_path(paths: PathSet, params: InteractionParams, bp: Breakpoints) -> float:
    """Sum of log_interaction_at_time over every time point of the paths."""
    return log_weight_path(paths.locations(), AttractionRepulsionView(params, bp))


def log_weight_path(locations: np.ndarray, interaction: InteractionFunction) -> float:
    """Total log interaction weight of a (N, K, 2) location panel."""
    if locations.shape[-2] < 2:
        return 0.0
    return float(np.sum(interaction.log_weight(pair_distances(locations))))
