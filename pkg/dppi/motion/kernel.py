"""
Closed-form transition and observation math for the continuous-time
correlated random walk.

Velocity on each axis is an Ornstein-Uhlenbeck process with reversion rate
beta, mean gamma and noise variance sigma2; location is its integral. Over a
step of length dt the (location, velocity) pair of one axis moves as

    next ~ N(T(dt) @ prev + gamma * d(dt), sigma2 * V(dt))

and the x and y axes are independent. The array functions here are
vectorised over leading dimensions so that the joint model can evaluate a
whole panel of individuals and time steps at once; the ``State``-level
functions wrap them for single transitions.
"""

from __future__ import annotations

import logging
import math
from typing import NamedTuple

import numpy as np
from numpy.polynomial import polynomial as npoly
from pydantic import BaseModel, ConfigDict, Field

from ..contracts.errors import DomainError
from ..contracts.models import LOCATION_COLUMNS, MU_X, MU_Y, V_X, V_Y, MovementParams, Observation, State

logger = logging.getLogger(__name__)

LOG_2PI = math.log(2.0 * math.pi)

# Below this value of beta*dt the cancelling closed forms switch to series.
SERIES_THRESHOLD = 0.1
_SERIES_TERMS = 20

# dt - (1 - e^{-x})/beta = dt * sum_{n>=2} (-1)^n x^(n-1) / n!
_DRIFT_GAP_COEFFS = np.array(
    [(-1) ** n / math.factorial(n) for n in range(2, 2 + _SERIES_TERMS)]
)
# v1 = dt^3 * sum_{n>=3} (-1)^n (2 - 2^(n-1)) x^(n-3) / n!
_V1_COEFFS = np.array(
    [(-1) ** n * (2 - 2 ** (n - 1)) / math.factorial(n) for n in range(3, 3 + _SERIES_TERMS)]
)


class StepTerms(NamedTuple):
    """Per-step kernel coefficients, each an array over steps."""

    dt: np.ndarray
    persistence: np.ndarray  # T[0][1] = (1 - e^{-beta dt}) / beta
    decay: np.ndarray  # T[1][1] = e^{-beta dt}
    drift_location: np.ndarray  # d[0] / gamma
    drift_velocity: np.ndarray  # d[1] / gamma
    v1: np.ndarray
    v2: np.ndarray
    v3: np.ndarray

    def column(self) -> "StepTerms":
        """View with a trailing axis so per-step terms broadcast across individuals."""
        return StepTerms(*(np.asarray(a)[..., None] for a in self))


class TransitionKernel(BaseModel):
    """Persistence matrix, drift and noise covariance of one step on one axis."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    T: np.ndarray = Field(description="2x2 persistence matrix")
    d: np.ndarray = Field(description="Drift 2-vector")
    V: np.ndarray = Field(description="2x2 noise covariance before scaling by sigma2")
    dt: float = Field(gt=0, description="Step length (seconds)")


def _check_domain(beta: float, dt) -> np.ndarray:
    dt = np.asarray(dt, dtype=float)
    if not beta > 0 or not np.isfinite(beta):
        raise DomainError("DOMAIN", f"beta must be positive and finite, got {beta}")
    if np.any(~(dt > 0)) or not np.all(np.isfinite(dt)):
        raise DomainError("DOMAIN", "time steps must be positive and finite")
    return dt


def step_terms(beta: float, dt) -> StepTerms:
    """Evaluate the kernel coefficients for one or many step lengths.

    Raises:
        DomainError: If beta or any dt is not strictly positive
    """
    dt = _check_domain(beta, dt)
    x = beta * dt
    small = x < SERIES_THRESHOLD

    persistence = -np.expm1(-x) / beta
    decay = np.exp(-x)
    drift_velocity = -np.expm1(-x)
    v2 = -np.expm1(-2.0 * x) / (2.0 * beta)
    v3 = np.expm1(-x) ** 2 / (2.0 * beta**2)

    with np.errstate(invalid="ignore"):
        gap_direct = dt + np.expm1(-x) / beta
        v1_direct = (dt + 2.0 * np.expm1(-x) / beta - np.expm1(-2.0 * x) / (2.0 * beta)) / beta**2
    gap_series = dt * x * npoly.polyval(x, _DRIFT_GAP_COEFFS)
    v1_series = dt**3 * npoly.polyval(x, _V1_COEFFS)

    return StepTerms(
        dt=dt,
        persistence=persistence,
        decay=decay,
        drift_location=np.where(small, gap_series, gap_direct),
        drift_velocity=drift_velocity,
        v1=np.where(small, v1_series, v1_direct),
        v2=v2,
        v3=v3,
    )


def build_kernel(beta: float, gamma: float, dt: float) -> TransitionKernel:
    """Build the one-axis transition kernel for a step of length dt.

    Args:
        beta: Velocity autocorrelation rate (> 0)
        gamma: Mean velocity on this axis
        dt: Step length (> 0)

    Returns:
        The persistence matrix, drift and unscaled noise covariance

    Raises:
        DomainError: If beta or dt is not strictly positive
    """
    t = step_terms(beta, float(dt))
    T = np.array([[1.0, float(t.persistence)], [0.0, float(t.decay)]])
    d = gamma * np.array([float(t.drift_location), float(t.drift_velocity)])
    V = np.array([[float(t.v1), float(t.v3)], [float(t.v3), float(t.v2)]])
    return TransitionKernel(T=T, d=d, V=V, dt=float(dt))


def bivariate_log_pdf(r0, r1, c00, c01, c11) -> np.ndarray:
    """Log density of a centred bivariate normal at residual (r0, r1)."""
    det = c00 * c11 - c01 * c01
    quad = (c11 * r0 * r0 - 2.0 * c01 * r0 * r1 + c00 * r1 * r1) / det
    return -LOG_2PI - 0.5 * np.log(det) - 0.5 * quad


def transition_mean(prev: np.ndarray, params: MovementParams, terms: StepTerms) -> np.ndarray:
    """Mean of the next state; prev has shape (..., 4) broadcastable against the step axis."""
    mean = np.empty(np.broadcast_shapes(prev.shape[:-1], terms.dt.shape) + (4,))
    for loc, vel, gamma in ((MU_X, V_X, params.gamma1), (MU_Y, V_Y, params.gamma2)):
        mean[..., loc] = prev[..., loc] + terms.persistence * prev[..., vel] + gamma * terms.drift_location
        mean[..., vel] = terms.decay * prev[..., vel] + gamma * terms.drift_velocity
    return mean


def transition_log_density(
    prev: np.ndarray, nxt: np.ndarray, params: MovementParams, terms: StepTerms
) -> np.ndarray:
    """Log transition density, vectorised over leading dimensions.

    The covariance is block diagonal, sigma2 * (I2 kron V), so the density is
    the product of one bivariate normal per axis.
    """
    mean = transition_mean(prev, params, terms)
    resid = nxt - mean
    s2 = params.sigma2
    c00, c01, c11 = s2 * terms.v1, s2 * terms.v3, s2 * terms.v2
    return bivariate_log_pdf(resid[..., MU_X], resid[..., V_X], c00, c01, c11) + bivariate_log_pdf(
        resid[..., MU_Y], resid[..., V_Y], c00, c01, c11
    )


def transition_cholesky(params: MovementParams, terms: StepTerms) -> tuple:
    """Lower Cholesky factor (l00, l10, l11) of sigma2 * V per step."""
    s2 = params.sigma2
    l00 = np.sqrt(s2 * terms.v1)
    l10 = s2 * terms.v3 / l00
    l11 = np.sqrt(np.maximum(s2 * (terms.v1 * terms.v2 - terms.v3**2) / terms.v1, 0.0))
    return l00, l10, l11


def correlate(z: np.ndarray, chol: tuple) -> np.ndarray:
    """Map standard normals (..., 4) to draws with per-axis covariance chol @ chol.T."""
    l00, l10, l11 = chol
    out = np.empty(np.broadcast_shapes(z.shape, np.shape(l00) + (4,)))
    for loc, vel in ((MU_X, V_X), (MU_Y, V_Y)):
        out[..., loc] = l00 * z[..., loc]
        out[..., vel] = l10 * z[..., loc] + l11 * z[..., vel]
    return out


def sample_transition(
    prev: np.ndarray, params: MovementParams, terms: StepTerms, rng: np.random.Generator
) -> np.ndarray:
    """Exact draw of the next state for every leading index of prev."""
    mean = transition_mean(prev, params, terms)
    chol = transition_cholesky(params, terms)
    return mean + correlate(rng.standard_normal(mean.shape), chol)


def step_log_density(prev: State, next: State, params: MovementParams, dt: float) -> float:
    """Log density of one individual's transition from prev to next over dt.

    Raises:
        DomainError: If dt is not strictly positive (singular covariance)
    """
    terms = step_terms(params.beta, float(dt))
    return float(transition_log_density(prev.as_array(), next.as_array(), params, terms))


def sample_step(prev: State, params: MovementParams, dt: float, rng: np.random.Generator) -> State:
    """Exact draw of the state dt seconds after prev."""
    terms = step_terms(params.beta, float(dt))
    return State.from_array(sample_transition(prev.as_array(), params, terms, rng))


def observation_log_density(obs: np.ndarray, states: np.ndarray, sigma_e2: float) -> np.ndarray:
    """Isotropic normal observation log density, vectorised over leading dimensions."""
    if not sigma_e2 > 0:
        raise DomainError("DOMAIN", f"sigma_e2 must be positive, got {sigma_e2}")
    resid = obs - states[..., LOCATION_COLUMNS]
    return -math.log(2.0 * math.pi * sigma_e2) - 0.5 * np.sum(resid**2, axis=-1) / sigma_e2


def sample_observations(states: np.ndarray, sigma_e2: float, rng: np.random.Generator) -> np.ndarray:
    if not sigma_e2 > 0:
        raise DomainError("DOMAIN", f"sigma_e2 must be positive, got {sigma_e2}")
    loc = states[..., LOCATION_COLUMNS]
    return loc + math.sqrt(sigma_e2) * rng.standard_normal(loc.shape)


def obs_log_density(obs: Observation, state: State, sigma_e2: float) -> float:
    """Log density of an observed location given the true state.

    Raises:
        DomainError: If sigma_e2 is not strictly positive
    """
    return float(observation_log_density(obs.as_array(), state.as_array(), sigma_e2))


def sample_obs(state: State, sigma_e2: float, rng: np.random.Generator) -> Observation:
    x, y = sample_observations(state.as_array(), sigma_e2, rng)
    return Observation(x=float(x), y=float(y))


def stationary_velocity_var(params: MovementParams) -> float:
    """Variance of the stationary OU velocity marginal, sigma2 / (2 beta)."""
    return params.sigma2 / (2.0 * params.beta)


def initial_velocity_log_density(states: np.ndarray, params: MovementParams) -> np.ndarray:
    """Stationary velocity marginal N(gamma, sigma2 / (2 beta)) per axis."""
    vel_var = stationary_velocity_var(params)
    vel_resid = states[..., [V_X, V_Y]] - params.gamma
    return -math.log(2.0 * math.pi * vel_var) - 0.5 * np.sum(vel_resid**2, axis=-1) / vel_var


def initial_location_log_density(states: np.ndarray, anchor: np.ndarray, location_var: float) -> np.ndarray:
    loc_resid = states[..., LOCATION_COLUMNS] - anchor
    return -math.log(2.0 * math.pi * location_var) - 0.5 * np.sum(loc_resid**2, axis=-1) / location_var


def initial_log_density(
    states: np.ndarray, anchor: np.ndarray, params: MovementParams, location_var: float
) -> np.ndarray:
    """Log density of first latent states.

    Velocities follow the stationary marginal; locations follow
    N(anchor, location_var * I2).
    """
    return initial_velocity_log_density(states, params) + initial_location_log_density(
        states, anchor, location_var
    )


def sample_initial_velocities(
    locations: np.ndarray, params: MovementParams, rng: np.random.Generator
) -> np.ndarray:
    """Complete (K, 2) start locations into (K, 4) states with stationary velocities."""
    locations = np.asarray(locations, dtype=float)
    states = np.empty(locations.shape[:-1] + (4,))
    states[..., LOCATION_COLUMNS] = locations
    sd = math.sqrt(stationary_velocity_var(params))
    states[..., [V_X, V_Y]] = params.gamma + sd * rng.standard_normal(locations.shape)
    return states
