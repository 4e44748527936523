"""Application settings using Pydantic Settings"""

from functools import lru_cache
from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Workbench settings loaded from environment variables"""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Numerics
    cocycle_precision: int = Field(
        default=50,
        description="Working precision (decimal digits) for mpmath evaluations",
    )
    max_exact_pieces: int = Field(
        default=1_000_000,
        description="Piece count above which sweeps fall back to sampled evaluation",
    )
    pointwise_tolerance: float = Field(
        default=1e-12,
        description="Tolerance for pointwise eigenvalue and Fourier residual checks",
    )

    # Sampling
    sample_count: int = Field(
        default=1000,
        description="Default number of sample points for sampled checks",
    )
    seed: int = Field(
        default=0,
        description="Seed for sample grids when an experiment does not give one",
    )

    # Growth verdicts
    growth_slope_threshold: float = Field(
        default=0.5,
        description="Minimum log-log slope for a 'growing' sweep verdict",
    )
    growth_r2_threshold: float = Field(
        default=0.9,
        description="Minimum coefficient of determination for a 'growing' verdict",
    )

    # Constructions
    approximation_q_max: int = Field(
        default=100_000,
        description="Default search bound for simultaneous approximation",
    )
    retry_attempts: int = Field(
        default=3,
        description="Attempts for refine-and-retry constructions",
    )

    # Output
    output_dir: str = Field(
        default="./runs",
        description="Parent directory for run directories",
    )

    # Logging
    log_level: str = Field(
        default="INFO",
        description="Logging level",
    )
    log_file_path: Optional[str] = Field(
        default=None,
        description="Optional path to a log file",
    )
    json_logs: bool = Field(
        default=False,
        description="Render logs as JSON lines instead of console output",
    )

    @field_validator("cocycle_precision")
    @classmethod
    def _precision_floor(cls, value: int) -> int:
        if value < 15:
            raise ValueError("cocycle_precision must be at least 15 digits")
        return value


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance"""
    return Settings()
