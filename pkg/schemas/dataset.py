"""
Dataset Schemas

On-disk manifest format and the synthetic dataset recipe with its
planted class effects.
"""

from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from schemas.trial import TrialTensor

SUPPORTED_FORMAT_VERSIONS = ("1.0",)


class TrialEntry(BaseModel):
    """One trial file listed in a manifest."""

    model_config = ConfigDict(extra="forbid")

    file: str = Field(..., description="Trial file path relative to the manifest")
    subject_id: str = Field(..., description="Subject identifier")
    label: int = Field(..., ge=0, le=1, description="Binary class label")
    n_samples: int = Field(..., gt=0, description="Samples per channel")
    trial_id: Optional[str] = Field(default=None, description="Trial identifier (defaults to file stem)")


class DatasetManifest(BaseModel):
    """
    JSON manifest describing a dataset.

    Each trial is a little-endian float32 binary file holding a row-major
    [C x N] matrix, so ``n_samples * len(channel_names) * 4`` bytes.
    """

    model_config = ConfigDict(extra="forbid")

    format_version: str = Field(default="1.0", description="Manifest format version")
    fs: float = Field(..., gt=0, description="Sampling rate shared by all trials")
    channel_names: list[str] = Field(..., min_length=1, description="Electrode names, in row order")
    trials: list[TrialEntry] = Field(default_factory=list, description="Trial files")

    @field_validator("format_version")
    @classmethod
    def _supported_version(cls, value: str) -> str:
        if value not in SUPPORTED_FORMAT_VERSIONS:
            raise ValueError(f"unsupported format_version {value!r}; supported: {SUPPORTED_FORMAT_VERSIONS}")
        return value

    @property
    def n_channels(self) -> int:
        return len(self.channel_names)

    @property
    def subjects(self) -> list[str]:
        return sorted({entry.subject_id for entry in self.trials})


class Dataset(BaseModel):
    """Loaded or generated trials with their channel names."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    fs: float = Field(..., gt=0, description="Sampling rate")
    channel_names: list[str] = Field(..., description="Electrode names")
    trials: list[TrialTensor] = Field(default_factory=list, description="Trials")

    @property
    def n_channels(self) -> int:
        return len(self.channel_names)

    @property
    def subjects(self) -> list[str]:
        return sorted({trial.subject_id for trial in self.trials})

    def subset(self, subjects: set[str]) -> list[TrialTensor]:
        """Trials whose subject is in ``subjects``, in dataset order."""
        return [trial for trial in self.trials if trial.subject_id in subjects]


# ============================================================================
# Synthetic recipe
# ============================================================================

Band = tuple[float, float]


class _Effect(BaseModel):
    model_config = ConfigDict(extra="forbid")

    band_hz: Band = Field(..., description="Band limits (low, high) in Hz")
    target_class: int = Field(default=1, ge=0, le=1, description="Class that carries the effect")

    @field_validator("band_hz")
    @classmethod
    def _ordered(cls, value: Band) -> Band:
        if not 0 < value[0] < value[1]:
            raise ValueError(f"band_hz must satisfy 0 < low < high, got {value}")
        return value


class MagnitudeBoost(_Effect):
    """Scale the in-band amplitude of one channel by ``gain``."""
    kind: Literal["magnitude_boost"] = "magnitude_boost"
    channel: int = Field(..., ge=0, description="Channel index")
    gain: float = Field(..., gt=0, description="Expected in-band RMS factor on the target class")


class CorrelationLink(_Effect):
    """Mix a shared band-limited source into two channels."""
    kind: Literal["correlation_link"] = "correlation_link"
    channel_pair: tuple[int, int] = Field(..., description="Channel indices")
    strength: float = Field(..., gt=0, le=1, description="Mixing weight of the shared source")


class PhaseLock(_Effect):
    """Drive two channels with one oscillation plus per-channel phase jitter."""
    kind: Literal["phase_lock"] = "phase_lock"
    channel_pair: tuple[int, int] = Field(..., description="Channel indices")
    jitter: float = Field(default=0.3, ge=0, description="Std of the phase jitter in radians")


PlantedEffect = Annotated[
    Union[MagnitudeBoost, CorrelationLink, PhaseLock],
    Field(discriminator="kind")
]


class SynthSpec(BaseModel):
    """Recipe for a synthetic dataset with planted class differences."""

    model_config = ConfigDict(extra="forbid")

    n_subjects: int = Field(default=40, ge=2, description="Number of subjects")
    trials_per_subject: int = Field(default=4, ge=2, description="Trials per subject (classes alternate)")
    n_channels: int = Field(default=8, ge=2, description="Electrode count C")
    fs: float = Field(default=128.0, gt=0, description="Sampling rate in Hz")
    duration_s: float = Field(default=20.0, gt=0, description="Trial length in seconds")
    noise_level: float = Field(default=0.1, ge=0, description="Std of white sensor noise added last")
    subject_gain_sigma: float = Field(
        default=0.1,
        ge=0,
        description="Log-normal sigma of per-subject channel gains"
    )
    effects: list[PlantedEffect] = Field(default_factory=list, description="Planted effects")
    channel_names: Optional[list[str]] = Field(default=None, description="Electrode names")
    seed: int = Field(default=0, description="Generator seed")

    @model_validator(mode="after")
    def _check_effects(self) -> "SynthSpec":
        nyquist = self.fs / 2.0
        for i, effect in enumerate(self.effects):
            if effect.band_hz[1] >= nyquist:
                raise ValueError(f"effects.{i}.band_hz: upper edge must be below Nyquist ({nyquist} Hz)")
            channels = [effect.channel] if isinstance(effect, MagnitudeBoost) else list(effect.channel_pair)
            if any(c >= self.n_channels for c in channels):
                raise ValueError(f"effects.{i}: channel index out of range for {self.n_channels} channels")
            if len(set(channels)) != len(channels):
                raise ValueError(f"effects.{i}.channel_pair: channels must differ")
        if self.channel_names is not None and len(self.channel_names) != self.n_channels:
            raise ValueError("channel_names length must equal n_channels")
        return self

    @property
    def n_samples(self) -> int:
        return int(round(self.duration_s * self.fs))

    def resolved_channel_names(self) -> list[str]:
        return self.channel_names or [f"ch{c:02d}" for c in range(self.n_channels)]


class GroundTruth(BaseModel):
    """Record of everything the generator planted."""
    spec: SynthSpec = Field(..., description="Recipe the dataset was generated from")
    effects: list[PlantedEffect] = Field(default_factory=list, description="Planted effects")
    subject_gains: dict[str, list[float]] = Field(
        default_factory=dict,
        description="Per-subject multiplicative channel gains"
    )
    class_counts: dict[str, int] = Field(default_factory=dict, description="Trials per class")
