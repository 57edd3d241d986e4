"""
Training Schemas

Configuration models for training runs and CLI commands. Unknown keys are
rejected so typos in config files fail fast.
"""

from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from schemas.filters import FeatureKind


class ClampBounds(BaseModel):
    """Projection bounds applied to filter parameters after every step."""

    model_config = ConfigDict(extra="forbid")

    mu_min_hz: float = Field(default=1.0, gt=0, description="Lowest allowed center frequency")
    mu_nyquist_margin_hz: float = Field(
        default=1.0,
        ge=0,
        description="Center frequency stays this far below Nyquist"
    )
    h_min_hz: float = Field(default=1.0, gt=0, description="Narrowest allowed bandwidth")
    h_max_hz: Optional[float] = Field(
        default=None,
        gt=0,
        description="Widest allowed bandwidth (defaults to fs/2)"
    )

    def resolve(self, fs: float) -> dict[str, float]:
        """Concrete bounds for a sampling rate."""
        nyquist = fs / 2.0
        return {
            "mu_min": self.mu_min_hz,
            "mu_max": max(self.mu_min_hz, nyquist - self.mu_nyquist_margin_hz),
            "h_min": self.h_min_hz,
            "h_max": self.h_max_hz if self.h_max_hz is not None else nyquist,
            "beta_raw_min": 2.0,
            "beta_raw_max": 3.0,
        }


class TrainConfig(BaseModel):
    """Hyperparameters of one training run."""

    model_config = ConfigDict(extra="forbid")

    feature_kind: FeatureKind = Field(default=FeatureKind.MAGNITUDE, description="Feature module")
    n_channels: Optional[int] = Field(
        default=None,
        ge=1,
        description="Electrode count C (taken from the dataset when omitted)"
    )
    n_maps: int = Field(default=2, ge=1, description="Filters per electrode / feature maps K")
    epochs: int = Field(default=100, ge=1, description="Training epochs")
    batch_size: int = Field(default=256, ge=2, description="Mini-batch size")
    lr0: float = Field(default=2e-3, ge=0, description="Initial learning rate (0 freezes all parameters)")
    filter_lr_scale: float = Field(
        default=1.0,
        gt=0,
        description="Learning-rate multiplier for the filter parameters (mu and h move in Hz)"
    )
    momentum_filters: float = Field(default=0.99, ge=0, lt=1, description="Nesterov momentum on filters")
    momentum_head: float = Field(default=0.9, ge=0, lt=1, description="Nesterov momentum on the classifier")
    gamma: float = Field(default=0.0, ge=0, description="L1 scale on classifier weights")
    seed: int = Field(default=0, description="Seed for sampling, shuffling and initialization")
    window_s: Optional[float] = Field(
        default=None,
        gt=0,
        description="Window length in seconds; None feeds whole trials"
    )
    windows_per_epoch: int = Field(
        default=1,
        ge=1,
        description="Random training windows drawn per trial occurrence and epoch"
    )
    head_init_scale: float = Field(
        default=0.0,
        ge=0,
        description="Half-width of the seeded uniform head-weight init (0 = zero init)"
    )
    bn_momentum: float = Field(default=0.1, gt=0, le=1, description="Running-statistics momentum")
    bn_eps: float = Field(default=1e-5, gt=0, description="Batch-norm variance guard")
    clamp: ClampBounds = Field(default_factory=ClampBounds, description="Filter projection bounds")

    @model_validator(mode="after")
    def _check_windowing(self) -> "TrainConfig":
        if self.window_s is None and self.windows_per_epoch != 1:
            raise ValueError("windows_per_epoch requires window_s")
        return self


class RunConfig(TrainConfig):
    """TrainConfig plus the inputs and outputs of a CLI command."""

    dataset: Optional[Path] = Field(default=None, description="Path to a dataset manifest")
    out: Path = Field(default=Path("./runs"), description="Root directory for run outputs")
    name: str = Field(default="run", description="Run name (directory under out)")
    folds: int = Field(default=10, ge=2, description="Cross-validation fold count")
    jobs: int = Field(default=1, ge=1, description="Fold worker pool size")
    top_k: int = Field(default=10, ge=1, description="Top features listed in interpretation exports")

    def train_config(self) -> TrainConfig:
        """The TrainConfig subset of this run configuration."""
        return TrainConfig(**self.model_dump(include=set(TrainConfig.model_fields)))
