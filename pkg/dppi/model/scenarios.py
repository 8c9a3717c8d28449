"""
Named simulation scenarios.

Movement parameters match the posterior means fitted to guppy shoal tracks;
the three interaction settings span weak, medium and strong attraction.
"""

from __future__ import annotations

import math
from typing import Dict

import numpy as np
from pydantic import BaseModel, Field

from ..contracts.models import InteractionParams, MovementParams

GUPPY_MOVEMENT = MovementParams(beta=0.15, gamma1=-1.2, gamma2=1.5, sigma2=1.7, sigma_e2=0.4)

# 10 frames per second
GUPPY_STEP = 0.1

SIMULATION_RADIUS = 4.0


class Scenario(BaseModel):
    """Interaction setting of one synthetic group."""

    name: str = Field(description="Scenario name")
    theta1: float = Field(gt=1, description="Peak height")
    theta2: float = Field(gt=0, description="Peak location")
    theta3: float = Field(gt=0, description="Descent rate")
    movement: MovementParams = Field(default=GUPPY_MOVEMENT, description="CTCRW parameters")

    def interaction(self, radius: float = SIMULATION_RADIUS) -> InteractionParams:
        return InteractionParams(theta1=self.theta1, theta2=self.theta2, theta3=self.theta3, radius=radius)


SCENARIOS: Dict[str, Scenario] = {
    "medium": Scenario(name="medium", theta1=32.0, theta2=33.0, theta3=0.3),
    "strong": Scenario(name="strong", theta1=100.0, theta2=20.0, theta3=0.3),
    "weak": Scenario(name="weak", theta1=10.0, theta2=80.0, theta3=0.5),
}


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise ValueError(f"Unknown scenario '{name}', expected one of {sorted(SCENARIOS)}") from None


def default_start(k: int = 10, spacing: float = 12.0, origin: tuple = (600.0, 100.0)) -> np.ndarray:
    """Start locations (K, 2) on a two-row lattice in the lower right of the tank."""
    cols = math.ceil(k / 2)
    idx = np.arange(k)
    x = origin[0] + spacing * (idx % cols)
    y = origin[1] + spacing * (idx // cols)
    return np.column_stack([x, y]).astype(float)
