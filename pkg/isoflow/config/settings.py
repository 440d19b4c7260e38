"""
Configuration settings for isoflow using Pydantic Settings.
"""

from functools import lru_cache
from pathlib import Path
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-wide settings with environment variable support (prefix ``ISOFLOW_``)."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="ISOFLOW_",
        case_sensitive=False,
        extra="ignore",
    )

    # Geometry numerics
    resolution: int = Field(
        default=100, ge=1, description="Default discretization M for iso mappings"
    )
    geodesic_samples: int = Field(
        default=100, ge=1, description="Default sample count m for geodesic rel-RMSE"
    )
    fd_step: float = Field(
        default=1e-4, gt=0.0, description="Central difference step for the M-matrix diagnostic"
    )
    iso_exp_step_cap_factor: int = Field(
        default=100, ge=1, description="Iso-exp stepping is capped at factor * M steps"
    )

    # Execution
    threads: int = Field(default=1, ge=1, description="Worker threads for per-column work")
    seed: int = Field(default=0, description="Default random seed")

    # Logging
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = Field(
        default="INFO", description="Logging level"
    )
    log_format: Literal["json", "console"] = Field(
        default="console", description="Log output format"
    )

    # Experiment artifacts
    output_dir: Path = Field(default=Path("./runs"), description="Experiment output directory")


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
