"""
Spectral Miner - Configuration Management

Central configuration using Pydantic settings. Environment variables use the
``MINER_`` prefix and may also be placed in a ``.env`` file.
"""

from pathlib import Path
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


RUN_SUBDIRS = ("checkpoints", "reports", "exports", "logs")


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="MINER_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )

    # Storage Configuration
    data_dir: Path = Field(
        default=Path("./data"),
        description="Default directory for generated and converted datasets"
    )
    runs_dir: Path = Field(
        default=Path("./runs"),
        description="Root directory for run outputs"
    )

    # Logging Configuration
    log_level: str = Field(default="INFO", description="Console log level")
    log_to_file: bool = Field(
        default=True,
        description="Also write DEBUG logs into the run's logs directory"
    )

    # Execution Configuration
    default_jobs: int = Field(
        default=1,
        ge=1,
        description="Fold worker pool size (1 keeps runs strictly sequential)"
    )
    default_folds: int = Field(
        default=10,
        ge=2,
        description="Number of subject-held-out cross-validation folds"
    )

    def run_layout(self, name: str, runs_dir: Optional[Path] = None) -> dict[str, Path]:
        """
        Create and return the directory layout of a named run.

        Args:
            name: Run name, used as the directory name under ``runs_dir``
            runs_dir: Override for the runs root

        Returns:
            Mapping of sub-directory name to its path, plus ``root``
        """
        root = (runs_dir or self.runs_dir) / name
        layout = {"root": root}
        for sub in RUN_SUBDIRS:
            path = root / sub
            path.mkdir(parents=True, exist_ok=True)
            layout[sub] = path
        return layout


# Global settings instance
settings = Settings()
