"""Configuration management using Pydantic Settings."""

from functools import lru_cache
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Settings loaded from SURVTEST_* environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="SURVTEST_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Simulation seed override (takes precedence over the config document)
    seed: int | None = Field(default=None, ge=0, lt=2**64)

    # Logging
    log_level: str = "WARNING"
    json_logs: bool = False

    # Numerical gates
    rcond_min: float = 1e-12  # Reciprocal-condition gate for the reduced covariance
    gate_tolerance: float = 1e-10  # Relative tolerance of the non-negativity gate
    eigen_cut: float = 1e-12  # Eigenvalues below eigen_cut * max are dropped
    imhof_tolerance: float = 1e-9  # Absolute tolerance of the tail integral

    # Eigensolver: "auto" runs Jacobi up to jacobi_max_dim, LAPACK above
    eigensolver: Literal["auto", "jacobi", "lapack"] = "auto"
    jacobi_max_dim: int = 32

    # Simulation
    workers: int = Field(default=1, ge=1)


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
