"""
Generalized Gaussian Filter Bank

Trainable band-pass filters defined directly on the frequency axis:

    |F(x)| = exp(-(|x - mu| / alpha) ** beta_eff)
    alpha  = h / (2 * ln(2) ** (1 / beta_eff))
    beta_eff = 8 * beta_raw - 14

``h`` is the full width at half maximum, so |F(mu +- h/2)| = 0.5 for every
shape. beta_eff = 2 is a Gaussian (a Morlet wavelet in time); large
beta_eff approaches an ideal rectangular band. The phase is linear with a
fixed group delay.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from common.errors import ShapeMismatchError, ValidationError
from schemas.filters import BankRecord, FeatureKind, FilterLayout, FilterParams, FilterRecord
from schemas.trial import Spectrum

logger = logging.getLogger("spectral_miner.dsp.filterbank")

GROUP_DELAY_S = 0.02
INIT_MU_HZ = 23.0
INIT_H_HZ = 44.0
INIT_BETA_RAW = 2.0
BETA_RAW_MIN = 2.0
BETA_RAW_MAX = 3.0
BETA_SCALE = 8.0
BETA_OFFSET = -14.0


def effective_shape(beta_raw):
    """Rescaled shape used by the filter; [2, 3] maps onto [2, 10]."""
    return BETA_SCALE * np.asarray(beta_raw, dtype=np.float64) + BETA_OFFSET


def alpha_from_fwhm(h, beta_eff):
    """
    Scale of the generalized Gaussian with half-maximum full width ``h``.

    Raises:
        ValidationError: For non-positive bandwidths or shapes below 2
    """
    h = np.asarray(h, dtype=np.float64)
    beta_eff = np.asarray(beta_eff, dtype=np.float64)
    if np.any(h <= 0):
        raise ValidationError(f"Bandwidth h must be positive, got {h}")
    if np.any(beta_eff < 2.0):
        raise ValidationError(f"Effective shape must be at least 2, got {beta_eff}")
    alpha = h / (2.0 * np.log(2.0) ** (1.0 / beta_eff))
    return float(alpha) if alpha.ndim == 0 else alpha


def linear_phase(freqs: np.ndarray, group_delay_s: float = GROUP_DELAY_S) -> np.ndarray:
    """Phase factor exp(-i 2 pi f tau) of a linear-phase filter."""
    return np.exp(-2j * np.pi * np.asarray(freqs) * group_delay_s)


def _exponent(mu, h, beta_raw, freqs):
    """Distance |x - mu| and the exponent (|x - mu| / alpha) ** beta_eff, broadcast."""
    beta_eff = effective_shape(beta_raw)
    alpha = h / (2.0 * np.log(2.0) ** (1.0 / beta_eff))
    distance = np.abs(freqs - mu)
    return distance, beta_eff, (distance / alpha) ** beta_eff


def gg_magnitude(mu, h, beta_raw, freqs) -> np.ndarray:
    """|F| for (broadcastable) parameter arrays on a frequency grid."""
    _, _, exponent = _exponent(mu, h, beta_raw, freqs)
    return np.exp(-exponent)


def gg_magnitude_and_grads(mu, h, beta_raw, freqs):
    """
    |F| and its partial derivatives w.r.t. mu, h and beta_raw.

    Uses the identity (d/alpha)**beta = ln2 * (2d/h)**beta, so that

        d|F|/dmu       =  |F| * beta * E / d * sign(x - mu)
        d|F|/dh        =  |F| * beta * E / h
        d|F|/dbeta_raw = -|F| * E * ln(2d/h) * 8

    with E the exponent and d = |x - mu|. All three vanish at x = mu
    (subgradient 0 for |x - mu|).
    """
    distance, beta_eff, exponent = _exponent(mu, h, beta_raw, freqs)
    magnitude = np.exp(-exponent)
    positive = distance > 0
    safe_distance = np.where(positive, distance, 1.0)
    sign = np.sign(freqs - mu)

    d_mu = np.where(positive, magnitude * beta_eff * exponent / safe_distance, 0.0) * sign
    d_h = magnitude * beta_eff * exponent / h
    log_ratio = np.log(2.0 * safe_distance / h)
    d_beta_raw = np.where(positive, -magnitude * exponent * log_ratio * BETA_SCALE, 0.0)
    return magnitude, d_mu, d_h, d_beta_raw


def filter_response(
    p: FilterParams,
    bin_freqs: np.ndarray,
    group_delay_s: float = GROUP_DELAY_S
) -> np.ndarray:
    """Complex response of one filter on a non-negative ascending bin grid."""
    bin_freqs = np.asarray(bin_freqs, dtype=np.float64)
    return gg_magnitude(p.mu, p.h, p.beta_raw, bin_freqs) * linear_phase(bin_freqs, group_delay_s)


def filter_response_grad(p: FilterParams, bin_freqs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Partial derivatives of |F| w.r.t. (mu, h, beta_raw) on a bin grid."""
    bin_freqs = np.asarray(bin_freqs, dtype=np.float64)
    _, d_mu, d_h, d_beta_raw = gg_magnitude_and_grads(p.mu, p.h, p.beta_raw, bin_freqs)
    return d_mu, d_h, d_beta_raw


# ============================================================================
# Bank
# ============================================================================

def layout_for(feature_kind: FeatureKind) -> FilterLayout:
    """PLV needs one filter shared by all electrodes; the other features filter per electrode."""
    if feature_kind == FeatureKind.PLV:
        return FilterLayout.SHARED
    return FilterLayout.PER_ELECTRODE


def validate_layout(feature_kind: FeatureKind, layout: FilterLayout) -> None:
    """Reject layout / feature pairings the feature module cannot use."""
    expected = layout_for(feature_kind)
    if layout != expected:
        raise ValidationError(
            f"{feature_kind.value} features require the {expected.value} filter layout, got {layout.value}"
        )


@dataclass
class FilterBank:
    """
    Filter parameters for K feature maps.

    Parameter arrays have shape [K, C] for per-electrode banks and [K, 1]
    for banks shared across electrodes, so they broadcast against
    [..., K, C, F] spectra.
    """
    layout: FilterLayout
    n_channels: int
    n_maps: int
    mu: np.ndarray
    h: np.ndarray
    beta_raw: np.ndarray
    group_delay_s: float = GROUP_DELAY_S

    @property
    def n_columns(self) -> int:
        return self.n_channels if self.layout == FilterLayout.PER_ELECTRODE else 1

    @property
    def n_filters(self) -> int:
        return self.n_maps * self.n_columns

    @property
    def n_parameters(self) -> int:
        return 3 * self.n_filters

    @property
    def beta_eff(self) -> np.ndarray:
        return effective_shape(self.beta_raw)

    def params(self, map_index: int, channel: int = 0) -> FilterParams:
        """Parameters of the filter used by ``channel`` in map ``map_index``."""
        column = channel if self.layout == FilterLayout.PER_ELECTRODE else 0
        return FilterParams(
            mu=float(self.mu[map_index, column]),
            h=float(self.h[map_index, column]),
            beta_raw=float(self.beta_raw[map_index, column]),
        )

    def magnitudes(self, freqs: np.ndarray) -> np.ndarray:
        """|F| of every filter, shape [K, C or 1, F]."""
        return gg_magnitude(self.mu[..., None], self.h[..., None], self.beta_raw[..., None], freqs)

    def responses(self, freqs: np.ndarray) -> np.ndarray:
        """Complex responses of every filter, shape [K, C or 1, F]."""
        return self.magnitudes(freqs) * linear_phase(freqs, self.group_delay_s)

    def clamp(self, bounds: dict[str, float]) -> None:
        """Project every parameter onto its box, in place."""
        np.clip(self.mu, bounds["mu_min"], bounds["mu_max"], out=self.mu)
        np.clip(self.h, bounds["h_min"], bounds["h_max"], out=self.h)
        np.clip(self.beta_raw, bounds["beta_raw_min"], bounds["beta_raw_max"], out=self.beta_raw)

    def copy(self) -> "FilterBank":
        return FilterBank(
            layout=self.layout,
            n_channels=self.n_channels,
            n_maps=self.n_maps,
            mu=self.mu.copy(),
            h=self.h.copy(),
            beta_raw=self.beta_raw.copy(),
            group_delay_s=self.group_delay_s,
        )

    def to_record(self, channel_names: Optional[list[str]] = None) -> BankRecord:
        """Serialize map-major: map 0 channel 0..C-1, then map 1, ..."""
        filters = []
        for k in range(self.n_maps):
            for column in range(self.n_columns):
                channel = None
                if self.layout == FilterLayout.PER_ELECTRODE:
                    channel = channel_names[column] if channel_names else f"ch{column:02d}"
                filters.append(FilterRecord(
                    map_index=k,
                    channel=channel,
                    mu_hz=float(self.mu[k, column]),
                    h_hz=float(self.h[k, column]),
                    beta_raw=float(self.beta_raw[k, column]),
                    beta_eff=float(effective_shape(self.beta_raw[k, column])),
                ))
        return BankRecord(
            layout=self.layout,
            n_channels=self.n_channels,
            n_maps=self.n_maps,
            group_delay_s=self.group_delay_s,
            filters=filters,
        )

    @classmethod
    def from_record(cls, record: BankRecord) -> "FilterBank":
        columns = record.n_channels if record.layout == FilterLayout.PER_ELECTRODE else 1
        if len(record.filters) != record.n_maps * columns:
            raise ValidationError(
                f"Bank record lists {len(record.filters)} filters, expected {record.n_maps * columns}"
            )
        shape = (record.n_maps, columns)
        mu = np.array([f.mu_hz for f in record.filters], dtype=np.float64).reshape(shape)
        h = np.array([f.h_hz for f in record.filters], dtype=np.float64).reshape(shape)
        beta_raw = np.array([f.beta_raw for f in record.filters], dtype=np.float64).reshape(shape)
        return cls(
            layout=record.layout,
            n_channels=record.n_channels,
            n_maps=record.n_maps,
            mu=mu,
            h=h,
            beta_raw=beta_raw,
            group_delay_s=record.group_delay_s,
        )


def init_bank(
    C: int,
    K: int,
    layout: FilterLayout,
    feature_kind: Optional[FeatureKind] = None
) -> FilterBank:
    """
    Initialize every filter at 23 Hz center, 44 Hz bandwidth, Gaussian shape.

    Args:
        C: Number of electrodes
        K: Number of feature maps
        layout: Per-electrode or shared filters
        feature_kind: When given, the layout must suit this feature

    Raises:
        ValidationError: For C < 1, K < 1 or an invalid layout/feature pairing
    """
    if C < 1 or K < 1:
        raise ValidationError(f"Filter bank needs C >= 1 and K >= 1, got C={C}, K={K}")
    layout = FilterLayout(layout)
    if feature_kind is not None:
        validate_layout(FeatureKind(feature_kind), layout)
    columns = C if layout == FilterLayout.PER_ELECTRODE else 1
    bank = FilterBank(
        layout=layout,
        n_channels=C,
        n_maps=K,
        mu=np.full((K, columns), INIT_MU_HZ),
        h=np.full((K, columns), INIT_H_HZ),
        beta_raw=np.full((K, columns), INIT_BETA_RAW),
    )
    logger.debug(f"Initialized {layout.value} bank: {bank.n_filters} filters, {bank.n_parameters} parameters")
    return bank


def filter_spectra(bins: np.ndarray, responses: np.ndarray) -> np.ndarray:
    """
    Multiply [..., C, F] spectra by [K, C or 1, F] responses.

    Returns:
        Filtered feature maps, shape [..., K, C, F]
    """
    if bins.shape[-1] != responses.shape[-1]:
        raise ShapeMismatchError(
            f"Spectra have {bins.shape[-1]} bins but filters were evaluated on {responses.shape[-1]}"
        )
    if responses.shape[-2] not in (1, bins.shape[-2]):
        raise ShapeMismatchError(
            f"Filters cover {responses.shape[-2]} channels but spectra have {bins.shape[-2]}"
        )
    return bins[..., None, :, :] * responses


def apply_filterbank(spectra: Spectrum, bank: FilterBank) -> list[Spectrum]:
    """Filter a multichannel spectrum with every map of the bank."""
    if spectra.n_channels != bank.n_channels:
        raise ShapeMismatchError(
            f"Spectrum has {spectra.n_channels} channels, bank expects {bank.n_channels}"
        )
    maps = filter_spectra(spectra.bins, bank.responses(spectra.bin_freqs))
    return [
        spectra.model_copy(update={"bins": maps[k]})
        for k in range(bank.n_maps)
    ]
