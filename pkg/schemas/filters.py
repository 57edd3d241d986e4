"""
Filter Schemas

Data models for generalized Gaussian band-pass filters, filter bank layouts
and the feature index map that ties classifier weights back to filters.
"""

from enum import Enum
from typing import Optional

from pydantic import BaseModel, Field


class FeatureKind(str, Enum):
    """Differentiable feature computed from the filtered feature maps."""
    MAGNITUDE = "magnitude"
    CORRELATION = "correlation"
    PLV = "plv"


class FilterLayout(str, Enum):
    """How filters are assigned to electrodes."""
    PER_ELECTRODE = "per_electrode"
    SHARED = "shared"


class FilterParams(BaseModel):
    """Trainable triple of one generalized Gaussian filter."""
    mu: float = Field(..., description="Center frequency in Hz")
    h: float = Field(..., gt=0, description="Full-width half-maximum bandwidth in Hz")
    beta_raw: float = Field(
        ...,
        ge=2.0,
        le=3.0,
        description="Stored shape parameter; the filter uses 8*beta_raw - 14"
    )

    @property
    def beta_eff(self) -> float:
        return 8.0 * self.beta_raw - 14.0


class FilterRecord(BaseModel):
    """Serialized filter with its position in the bank."""
    map_index: int = Field(..., ge=0, description="Feature map index j")
    channel: Optional[str] = Field(
        default=None,
        description="Electrode name; None for filters shared across electrodes"
    )
    mu_hz: float = Field(..., description="Center frequency in Hz")
    h_hz: float = Field(..., description="FWHM bandwidth in Hz")
    beta_raw: float = Field(..., description="Stored shape parameter")
    beta_eff: float = Field(..., description="Effective shape parameter")


class BankRecord(BaseModel):
    """Serialized filter bank."""
    layout: FilterLayout = Field(..., description="Filter-to-electrode assignment")
    n_channels: int = Field(..., ge=1, description="Number of electrodes C")
    n_maps: int = Field(..., ge=1, description="Number of feature maps K")
    group_delay_s: float = Field(default=0.02, description="Linear-phase group delay")
    filters: list[FilterRecord] = Field(default_factory=list, description="Filters, map-major")


class FeatureIndexEntry(BaseModel):
    """Which (channel, map) or (channel pair, map) a feature index refers to."""
    index: int = Field(..., ge=0, description="Position in the feature vector")
    map_index: int = Field(..., ge=0, description="Feature map the value comes from")
    channels: list[str] = Field(..., description="One electrode, or an ordered electrode pair")
    channel_indices: list[int] = Field(..., description="Electrode positions matching channels")

    @property
    def name(self) -> str:
        return f"{'-'.join(self.channels)}@map{self.map_index}"
