"""
Trial Schemas

Data models for multichannel recording windows, their spectra and
equal-length batches.
"""

from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from common.errors import ShapeMismatchError, ValidationError


class TrialTensor(BaseModel):
    """One multichannel recording window (channels x samples)."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    data: np.ndarray = Field(..., description="Real matrix [C channels x N samples]")
    fs: float = Field(..., gt=0, description="Sampling rate in Hz")
    label: int = Field(..., ge=0, le=1, description="Binary class label")
    subject_id: str = Field(..., description="Opaque subject identifier")
    trial_id: str = Field(default="", description="Opaque trial identifier")
    degenerate: bool = Field(
        default=False,
        description="Set when the trial had zero variance and was zeroed"
    )

    @field_validator("data", mode="before")
    @classmethod
    def _as_matrix(cls, value) -> np.ndarray:
        data = np.asarray(value, dtype=np.float64)
        if data.ndim != 2 or data.shape[0] == 0 or data.shape[1] == 0:
            raise ValueError(f"trial data must be a non-empty 2-D matrix, got shape {data.shape}")
        return data

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.fs


class Spectrum(BaseModel):
    """One-sided spectrum of every channel of a trial."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    bins: np.ndarray = Field(..., description="Complex matrix [C x (N//2 + 1)]")
    bin_freqs: np.ndarray = Field(..., description="Bin centre frequencies in Hz")
    n_samples: int = Field(..., gt=0, description="Length N of the transformed signal")
    fs: float = Field(..., gt=0, description="Sampling rate in Hz")

    @property
    def n_channels(self) -> int:
        return self.bins.shape[0]


class TrialBatch(BaseModel):
    """Equal-length trials stacked for one forward/backward pass."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    data: np.ndarray = Field(..., description="Real tensor [B x C x N]")
    labels: np.ndarray = Field(..., description="Integer labels [B]")
    fs: float = Field(..., gt=0, description="Sampling rate in Hz")
    trial_ids: list[str] = Field(default_factory=list, description="Source trial of each row")
    batch_id: Optional[str] = Field(default=None, description="Identifier used in logs")

    @property
    def size(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[2]

    @classmethod
    def from_trials(cls, trials: list[TrialTensor], batch_id: Optional[str] = None) -> "TrialBatch":
        """
        Stack trials into a batch.

        Raises:
            ValidationError: If the list is empty or sampling rates differ
            ShapeMismatchError: If channel counts or trial lengths differ
        """
        if not trials:
            raise ValidationError("Cannot build a batch from zero trials")
        shapes = {trial.data.shape for trial in trials}
        if len(shapes) != 1:
            raise ShapeMismatchError(
                f"Batch trials must share channels and length, got shapes {sorted(shapes)}"
            )
        rates = {trial.fs for trial in trials}
        if len(rates) != 1:
            raise ValidationError(f"Batch trials must share one sampling rate, got {sorted(rates)}")
        return cls(
            data=np.stack([trial.data for trial in trials]),
            labels=np.array([trial.label for trial in trials], dtype=np.int64),
            fs=trials[0].fs,
            trial_ids=[trial.trial_id for trial in trials],
            batch_id=batch_id,
        )
