"""
Run-level configuration read from a single JSON file.

Defaults carry vague priors and the guppy scenario settings; ``dppi --print-defaults`` dumps them.
"""

from __future__ import annotations

from pathlib import Path
from typing import Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..contracts.models import InteractionParams, MovementParams
from ..inference.chain import ChainConfig
from ..inference.priors import PriorSpec
from ..model.scenarios import GUPPY_STEP, SCENARIOS, SIMULATION_RADIUS, Scenario
from .tracks import TrackColumns


class InteractionOverride(BaseModel):
    """Interaction values replacing those of the named scenario; unset values are kept."""

    model_config = ConfigDict(extra="forbid")

    theta1: Optional[float] = Field(default=None, gt=1, description="Peak height")
    theta2: Optional[float] = Field(default=None, gt=0, description="Peak location")
    theta3: Optional[float] = Field(default=None, gt=0, description="Descent rate")


class SimulationConfig(BaseModel):
    """Group size, grid, start lattice and parameter overrides of simulated scenarios."""

    model_config = ConfigDict(extra="forbid")

    k: int = Field(default=10, ge=1, description="Number of individuals")
    n: int = Field(default=200, ge=2, description="Number of time points")
    dt: float = Field(default=GUPPY_STEP, gt=0, description="Step between time points (seconds)")
    radius: float = Field(default=SIMULATION_RADIUS, ge=0, description="Hard-core radius of the simulator")
    spacing: float = Field(default=12.0, gt=0, description="Start lattice spacing (pixels)")
    origin: Tuple[float, float] = Field(default=(600.0, 100.0), description="Start lattice corner")
    save_latent: bool = Field(default=True, description="Also write the latent states")
    movement: Optional[MovementParams] = Field(
        default=None, description="CTCRW parameters; defaults to those of the scenario"
    )
    interaction: InteractionOverride = Field(default_factory=InteractionOverride)

    def parameters(self, scenario: Scenario) -> Tuple[MovementParams, InteractionParams]:
        """Scenario parameters with this configuration's overrides applied."""
        theta = scenario.model_dump(include={"theta1", "theta2", "theta3"})
        theta.update(self.interaction.model_dump(exclude_none=True))
        return self.movement or scenario.movement, InteractionParams(radius=self.radius, **theta)


class KStarConfig(BaseModel):
    """Distance grid and envelope settings."""

    model_config = ConfigDict(extra="forbid")

    grid_points: int = Field(default=100, ge=2)
    max_distance: Optional[float] = Field(default=None, gt=0, description="Defaults to the largest observed distance")
    nsim: int = Field(default=100, ge=2, description="Posterior-predictive simulations per envelope")
    level: float = Field(default=0.95, gt=0, lt=1)
    observed: bool = Field(default=True, description="Use observed rather than latent locations")


class RunConfig(BaseModel):
    """Everything a command needs besides its input files."""

    model_config = ConfigDict(extra="forbid")

    model: Literal["independent", "dppi"] = Field(default="dppi")
    scenario: str = Field(default="medium", description="Simulation scenario name")
    seed: int = Field(default=0, ge=0, description="Master seed of every random stream")
    chains: int = Field(default=1, ge=1)
    priors: PriorSpec = Field(default_factory=PriorSpec)
    chain: ChainConfig = Field(default_factory=ChainConfig)
    simulation: SimulationConfig = Field(default_factory=SimulationConfig)
    kstar: KStarConfig = Field(default_factory=KStarConfig)
    tracks: TrackColumns = Field(default_factory=TrackColumns)
    output_dir: Optional[Path] = Field(default=None, description="Defaults to the DPPI_OUTPUT_DIR setting")

    @field_validator("scenario")
    @classmethod
    def validate_scenario(cls, v: str) -> str:
        if v not in SCENARIOS:
            raise ValueError(f"Unknown scenario '{v}', expected one of {sorted(SCENARIOS)}")
        return v

    @model_validator(mode="after")
    def check_simulation_parameters(self) -> "RunConfig":
        try:
            self.simulation.parameters(SCENARIOS[self.scenario])
        except ValidationError as e:
            raise ValueError(f"simulation overrides give invalid interaction parameters: {e.errors()[0]['msg']}") from e
        return self

    def with_overrides(self, **overrides) -> "RunConfig":
        """Apply command-line overrides; unset values are ignored and the result is revalidated."""
        update = {k: v for k, v in overrides.items() if v is not None}
        return RunConfig.model_validate({**self.model_dump(), **update})


def load_run_config(path: Optional[Path]) -> RunConfig:
    if path is None:
        return RunConfig()
    return RunConfig.model_validate_json(Path(path).read_text(encoding="utf-8"))


def default_config_json() -> str:
    return RunConfig().model_dump_json(indent=2) + "\n"
