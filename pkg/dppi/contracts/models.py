"""
Core data contracts for dppi.

This module defines the Pydantic models that establish the data contracts
shared by the motion kernel, the interaction function, the joint model, the
samplers and the file formats. Array-valued containers hold numpy arrays
indexed ``[time, individual, component]`` and validate their shapes on
construction.
"""

from __future__ import annotations

from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Column order of one latent state vector.
STATE_COMPONENTS = ("mu_x", "v_x", "mu_y", "v_y")
MU_X, V_X, MU_Y, V_Y = range(4)
LOCATION_COLUMNS = [MU_X, MU_Y]

MOVEMENT_PARAMETERS = ("beta", "gamma1", "gamma2", "sigma2", "sigma_e2")
INTERACTION_PARAMETERS = ("theta1", "theta2", "theta3")
ALL_PARAMETERS = MOVEMENT_PARAMETERS + INTERACTION_PARAMETERS


class State(BaseModel):
    """True location and instantaneous velocity of one individual at one time."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    mu_x: float = Field(description="x location (pixels)")
    v_x: float = Field(description="x velocity (pixels per second)")
    mu_y: float = Field(description="y location (pixels)")
    v_y: float = Field(description="y velocity (pixels per second)")

    def as_array(self) -> np.ndarray:
        return np.array([self.mu_x, self.v_x, self.mu_y, self.v_y], dtype=float)

    @classmethod
    def from_array(cls, values: np.ndarray) -> "State":
        mu_x, v_x, mu_y, v_y = (float(v) for v in values)
        return cls(mu_x=mu_x, v_x=v_x, mu_y=mu_y, v_y=v_y)


class Observation(BaseModel):
    """Observed location of one individual at one time."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    x: float = Field(description="Observed x location (pixels)")
    y: float = Field(description="Observed y location (pixels)")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)


class MovementParams(BaseModel):
    """Parameters of the continuous-time correlated random walk, shared by all individuals."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    beta: float = Field(gt=0, description="Velocity autocorrelation (mean-reversion) rate")
    gamma1: float = Field(description="Mean x velocity (drift)")
    gamma2: float = Field(description="Mean y velocity (drift)")
    sigma2: float = Field(gt=0, description="Velocity noise variance")
    sigma_e2: float = Field(gt=0, description="Observation error variance")

    @property
    def gamma(self) -> np.ndarray:
        return np.array([self.gamma1, self.gamma2])


class InteractionParams(BaseModel):
    """Parameters of the attraction-repulsion interaction function."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    theta1: float = Field(gt=1, description="Peak height of the interaction function")
    theta2: float = Field(description="Distance at which the peak occurs")
    theta3: float = Field(gt=0, description="Rate of descent after the peak")
    radius: float = Field(default=0.0, ge=0, description="Hard-core radius R")

    @model_validator(mode="after")
    def check_peak_outside_core(self) -> "InteractionParams":
        if not self.theta2 > self.radius:
            raise ValueError(
                f"theta2={self.theta2} must exceed the hard-core radius {self.radius}"
            )
        return self

    def key(self) -> tuple:
        """Hashable identity used to cache solved breakpoints."""
        return (self.theta1, self.theta2, self.theta3, self.radius)


class TimeGrid(BaseModel):
    """Strictly increasing observation instants shared by every individual."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    times: List[float] = Field(description="Observation instants (seconds)")

    @field_validator("times")
    @classmethod
    def validate_times(cls, v: List[float]) -> List[float]:
        if len(v) < 2:
            raise ValueError("A time grid needs at least two instants")
        if np.any(np.diff(np.asarray(v, dtype=float)) <= 0):
            raise ValueError("Time grid must be strictly increasing")
        return [float(t) for t in v]

    @classmethod
    def regular(cls, n: int, dt: float, t0: float = 0.0) -> "TimeGrid":
        return cls(times=[t0 + i * dt for i in range(n)])

    @property
    def n(self) -> int:
        return len(self.times)

    @property
    def steps(self) -> np.ndarray:
        """Per-step durations; entry i-1 is the gap between instants i-1 and i."""
        return np.diff(np.asarray(self.times, dtype=float))


def _as_panel(v, width: int, what: str) -> np.ndarray:
    arr = np.array(v, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != width:
        raise ValueError(f"{what} must have shape (N, K, {width}), got {arr.shape}")
    if arr.shape[1] < 1:
        raise ValueError(f"{what} needs at least one individual")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} must be finite")
    return arr


class PathSet(BaseModel):
    """Latent states of K individuals over N time points, indexed [time, individual, component]."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    states: np.ndarray = Field(description="Array of shape (N, K, 4) in (mu_x, v_x, mu_y, v_y) order")
    grid: TimeGrid = Field(description="Observation instants")

    @field_validator("states", mode="before")
    @classmethod
    def validate_states(cls, v) -> np.ndarray:
        return _as_panel(v, 4, "states")

    @model_validator(mode="after")
    def check_grid(self) -> "PathSet":
        if self.states.shape[0] != self.grid.n:
            raise ValueError(
                f"states cover {self.states.shape[0]} times but the grid has {self.grid.n}"
            )
        return self

    @property
    def n(self) -> int:
        return self.states.shape[0]

    @property
    def k(self) -> int:
        return self.states.shape[1]

    def locations(self) -> np.ndarray:
        """True locations, shape (N, K, 2)."""
        return self.states[:, :, LOCATION_COLUMNS]


class ObservationSet(BaseModel):
    """Observed locations of K individuals over N time points, indexed [time, individual, axis]."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    obs: np.ndarray = Field(description="Array of shape (N, K, 2) of (x, y)")
    grid: TimeGrid = Field(description="Observation instants")
    ids: Optional[List[str]] = Field(
        default=None, description="Individual labels, in column order"
    )

    @field_validator("obs", mode="before")
    @classmethod
    def validate_obs(cls, v) -> np.ndarray:
        return _as_panel(v, 2, "obs")

    @model_validator(mode="after")
    def check_dimensions(self) -> "ObservationSet":
        if self.obs.shape[0] != self.grid.n:
            raise ValueError(
                f"observations cover {self.obs.shape[0]} times but the grid has {self.grid.n}"
            )
        if self.ids is None:
            self.ids = [str(k) for k in range(self.obs.shape[1])]
        elif len(self.ids) != self.obs.shape[1]:
            raise ValueError("ids must name every individual exactly once")
        return self

    @property
    def n(self) -> int:
        return self.obs.shape[0]

    @property
    def k(self) -> int:
        return self.obs.shape[1]

    def locations(self) -> np.ndarray:
        return self.obs
