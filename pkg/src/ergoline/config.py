"""Configuration system for Ergoline.

Uses pydantic-settings to load runtime settings from environment variables
and .env files. Experiment definitions live in JSON configs (see
``ergoline.experiments.loader``); these settings only cover how the tool runs
and the numerical defaults shared by every pipeline.
"""

from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables.

    All settings can be overridden via environment variables or .env file.
    Environment variables are prefixed with ERGOLINE_ (e.g., ERGOLINE_THREADS).
    """

    model_config = SettingsConfigDict(
        env_prefix="ERGOLINE_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Execution
    threads: int = Field(
        default=1,
        ge=1,
        description="Worker threads for path simulation (CLI --threads overrides)",
    )
    block_size: int = Field(
        default=4096,
        ge=1,
        description="Paths per RNG block; results never depend on the thread count",
    )
    output_dir: Path = Field(
        default=Path("results"),
        description="Directory for CSV/JSON/SVG outputs",
    )

    # Certification grid
    grid_points: int = Field(
        default=512,
        ge=2,
        description="Points of the geometric audit grid for drift checks",
    )
    grid_lo: float = Field(default=1e-3, gt=0, description="Left end of the audit grid")
    grid_hi: float = Field(default=1e3, gt=0, description="Right end of the audit grid")
    drift_tolerance: float = Field(
        default=1e-9,
        ge=0,
        description="Allowed margin LV + phi(V), relative to |LV|",
    )

    # Numerics
    audit_tolerance: float = Field(
        default=1e-9,
        ge=0,
        description="Slack allowed in grid audits of product decompositions",
    )
    quad_rel_tol: float = Field(
        default=1e-10,
        gt=0,
        description="Relative tolerance for adaptive quadrature",
    )
    root_rel_tol: float = Field(
        default=1e-12,
        gt=0,
        description="Relative tolerance for monotone root finding",
    )
    lambda_grid_points: int = Field(
        default=200,
        ge=2,
        description="Points of the geometric lambda grid scanned for k(lambda) < 0",
    )
    lambda_cap: float = Field(
        default=10.0,
        gt=0,
        description="Upper end of the lambda scan when no lambda0 is known",
    )


# Singleton instance for easy import
config = Settings()
