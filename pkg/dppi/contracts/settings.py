"""
Process-level settings for dppi.

This module defines environment-driven settings using Pydantic Settings.
Run-level choices (priors, chain lengths, scenarios) live in
``dppi.io.config.RunConfig`` instead.
"""

import logging
import os
from pathlib import Path

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings with environment variable support (prefix ``DPPI_``)."""

    model_config = SettingsConfigDict(
        env_prefix="DPPI_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
    )

    # Logging
    log_level: str = Field(default="INFO", description="Log level")
    log_format: str = Field(
        default="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        description="Log format",
    )

    # Execution
    workers: int = Field(
        default=1, ge=1, description="Worker processes for replicate simulations and chains"
    )
    progress: bool = Field(default=True, description="Show tqdm progress bars")

    # Output
    output_dir: Path = Field(default=Path("runs"), description="Default output directory")

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Accept only level names known to the logging module."""
        level = v.upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ValueError(f"Unknown log level: {v}")
        return level

    @field_validator("output_dir")
    @classmethod
    def resolve_output_dir(cls, v: Path) -> Path:
        """Resolve relative paths against the working directory."""
        if not v.is_absolute():
            v = Path(os.getcwd()) / v
        return v.resolve()

    def configure_logging(self) -> None:
        """Install the root handler once per process."""
        logging.basicConfig(level=self.log_level, format=self.log_format)


# Global settings instance
settings = Settings()
