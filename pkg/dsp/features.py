"""
Feature Modules

Differentiable features computed from the K filtered feature maps:

- band magnitude: mean |x(w)| over every one-sided bin, per channel and map
- correlation: |Pearson r| of every channel pair within a map
- PLV: phase-locking value of every channel pair within a map, computed
  from four real inner-product matrices of the unit-modulus analytic signal

Array functions take a leading batch axis: maps are [B, K, C, F] spectra
or [B, K, C, N] signals. Pairs are ordered row-major (c1 < c2) and maps
are concatenated by map index, so feature index = k * P + pair.
Each feature has a matching ``*_backward`` that maps an upstream gradient
[B, D] back onto its input using the complex-gradient convention
g = dL/dRe + i dL/dIm.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from common.errors import ShapeMismatchError, ValidationError
from schemas.filters import FeatureIndexEntry, FeatureKind
from schemas.trial import Spectrum

logger = logging.getLogger("spectral_miner.dsp.features")

ENVELOPE_FLOOR = 1e-12


@dataclass
class FeatureResult:
    """Feature values [B, D] plus per-batch flags and the cache used by backward."""
    values: np.ndarray
    feature_kind: FeatureKind
    flags: list[str] = field(default_factory=list)
    cache: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return self.values.shape[-1]


# ============================================================================
# Layout
# ============================================================================

def n_pairs(C: int) -> int:
    return C * (C - 1) // 2


def pair_indices(C: int) -> tuple[np.ndarray, np.ndarray]:
    """Row-major upper-triangle (c1 < c2) index arrays."""
    return np.triu_indices(C, k=1)


def feature_dim(feature_kind: FeatureKind, C: int, K: int) -> int:
    """
    Length D of the feature vector.

    Raises:
        ValidationError: For connectivity features with fewer than 2 channels
    """
    feature_kind = FeatureKind(feature_kind)
    if C < 1 or K < 1:
        raise ValidationError(f"Feature layout needs C >= 1 and K >= 1, got C={C}, K={K}")
    if feature_kind == FeatureKind.MAGNITUDE:
        return C * K
    if C < 2:
        raise ValidationError(f"{feature_kind.value} features need at least 2 channels, got {C}")
    return K * n_pairs(C)


def count_parameters(feature_kind: FeatureKind, C: int, K: int) -> int:
    """Trainable scalars of the whole model: filters + classifier weights + bias."""
    feature_kind = FeatureKind(feature_kind)
    filter_params = 3 * K if feature_kind == FeatureKind.PLV else 3 * C * K
    return filter_params + feature_dim(feature_kind, C, K) + 1


def feature_index_map(
    feature_kind: FeatureKind,
    C: int,
    K: int,
    channel_names: Optional[list[str]] = None
) -> list[FeatureIndexEntry]:
    """Which channel (or channel pair) and map every feature index belongs to."""
    feature_kind = FeatureKind(feature_kind)
    names = channel_names or [f"ch{c:02d}" for c in range(C)]
    if len(names) != C:
        raise ValidationError(f"Expected {C} channel names, got {len(names)}")

    entries = []
    if feature_kind == FeatureKind.MAGNITUDE:
        for k in range(K):
            for c in range(C):
                entries.append(FeatureIndexEntry(
                    index=len(entries), map_index=k, channels=[names[c]], channel_indices=[c]
                ))
        return entries

    feature_dim(feature_kind, C, K)
    rows, cols = pair_indices(C)
    for k in range(K):
        for a, b in zip(rows.tolist(), cols.tolist()):
            entries.append(FeatureIndexEntry(
                index=len(entries),
                map_index=k,
                channels=[names[a], names[b]],
                channel_indices=[a, b],
            ))
    return entries


def _stack_maps(maps: Union[np.ndarray, list[Spectrum]]) -> np.ndarray:
    """Accept [.., K, C, F] arrays or a list of per-map Spectrum objects."""
    if isinstance(maps, np.ndarray):
        return maps
    return np.stack([spectrum.bins for spectrum in maps])


def _leading(values: np.ndarray) -> np.ndarray:
    """Promote a single trial [K, C, T] to a batch of one."""
    if values.ndim == 3:
        return values[None]
    if values.ndim != 4:
        raise ShapeMismatchError(f"Expected [B, K, C, T] feature maps, got shape {values.shape}")
    return values


# ============================================================================
# Band magnitude
# ============================================================================

def band_magnitude(filtered: Union[np.ndarray, list[Spectrum]]) -> FeatureResult:
    """
    Mean magnitude over all one-sided bins of every filtered channel.

    Args:
        filtered: Filtered spectra [B, K, C, F], [K, C, F] or a list of K
            Spectrum maps of one trial

    Returns:
        FeatureResult with values [B, K*C], map-major
    """
    bins = _leading(_stack_maps(filtered))
    B, K, C, _ = bins.shape
    values = np.abs(bins).mean(axis=-1).reshape(B, K * C)
    return FeatureResult(values=values, feature_kind=FeatureKind.MAGNITUDE)


# ============================================================================
# Correlation
# ============================================================================

def correlation_features(filtered_time: np.ndarray) -> FeatureResult:
    """
    Absolute Pearson correlation of every channel pair within each map.

    A channel whose filtered signal has zero variance gets correlation 0
    with every other channel and is flagged.

    Args:
        filtered_time: Real filtered signals [B, K, C, N] or [K, C, N]
    """
    y = _leading(np.asarray(filtered_time, dtype=np.float64))
    B, K, C, _ = y.shape
    if C < 2:
        raise ValidationError(f"Correlation features need at least 2 channels, got {C}")
    rows, cols = pair_indices(C)

    centered = y - y.mean(axis=-1, keepdims=True)
    norms = np.sqrt((centered ** 2).sum(axis=-1))
    dead = norms == 0.0
    safe_norms = np.where(dead, 1.0, norms)
    unit = np.where(dead[..., None], 0.0, centered / safe_norms[..., None])

    corr = unit @ unit.swapaxes(-1, -2)
    r = corr[..., rows, cols]
    values = np.minimum(np.abs(r), 1.0).reshape(B, -1)

    flags = []
    for b, k, c in zip(*np.nonzero(dead)):
        flags.append(f"zero-variance channel {c} in map {k} (batch row {b})")
    if flags:
        logger.warning(f"Correlation: {len(flags)} zero-variance filtered channel(s); correlations set to 0")

    return FeatureResult(
        values=values,
        feature_kind=FeatureKind.CORRELATION,
        flags=flags,
        cache={"unit": unit, "norms": safe_norms, "dead": dead, "r": r},
    )


def correlation_backward(grad_values: np.ndarray, result: FeatureResult) -> np.ndarray:
    """Gradient [B, K, C, N] w.r.t. the filtered signals; subgradient 0 at r = 0."""
    unit = result.cache["unit"]
    B, K, C, _ = unit.shape
    rows, cols = pair_indices(C)

    upper = np.zeros((B, K, C, C))
    upper[..., rows, cols] = grad_values.reshape(B, K, -1) * np.sign(result.cache["r"])
    grad_unit = (upper + upper.swapaxes(-1, -2)) @ unit

    radial = (unit * grad_unit).sum(axis=-1, keepdims=True)
    grad_centered = (grad_unit - unit * radial) / result.cache["norms"][..., None]
    grad_centered = np.where(result.cache["dead"][..., None], 0.0, grad_centered)
    return grad_centered - grad_centered.mean(axis=-1, keepdims=True)


# ============================================================================
# Phase-locking value
# ============================================================================

def plv_features(analytic: np.ndarray) -> FeatureResult:
    """
    Phase-locking value of every channel pair within each map.

    With the analytic signal normalized to u + iv on the unit circle,

        PLV = |(U U^T + V V^T) - i (U V^T - V U^T)| / T

    Envelopes below 1e-12 are clamped to 1e-12 and flagged.

    Args:
        analytic: Complex analytic signals [B, K, C, N] or [K, C, N]
    """
    z = _leading(np.asarray(analytic, dtype=np.complex128))
    B, K, C, T = z.shape
    if C < 2:
        raise ValidationError(f"PLV features need at least 2 channels, got {C}")
    if T == 0:
        raise ValidationError("PLV needs at least one sample")
    rows, cols = pair_indices(C)

    envelope = np.abs(z)
    clamped = envelope < ENVELOPE_FLOOR
    safe_envelope = np.maximum(envelope, ENVELOPE_FLOOR)
    u = z.real / safe_envelope
    v = z.imag / safe_envelope

    uu = u @ u.swapaxes(-1, -2)
    vv = v @ v.swapaxes(-1, -2)
    uv = u @ v.swapaxes(-1, -2)
    vu = v @ u.swapaxes(-1, -2)
    cross = (uu + vv) - 1j * (uv - vu)

    pairs = cross[..., rows, cols]
    values = np.minimum(np.abs(pairs) / T, 1.0).reshape(B, -1)

    flags = []
    n_clamped = int(clamped.sum())
    if n_clamped:
        flags.append(f"envelope clamped at {n_clamped} sample(s)")
        logger.warning(f"PLV: envelope below {ENVELOPE_FLOOR} at {n_clamped} sample(s); clamped")

    return FeatureResult(
        values=values,
        feature_kind=FeatureKind.PLV,
        flags=flags,
        cache={
            "unit": u + 1j * v,
            "envelope": safe_envelope,
            "clamped": clamped,
            "cross": cross,
        },
    )


def plv_backward(grad_values: np.ndarray, result: FeatureResult) -> np.ndarray:
    """
    Complex gradient [B, K, C, N] w.r.t. the analytic signals.

    Samples whose envelope was clamped contribute no gradient.
    """
    unit = result.cache["unit"]
    cross = result.cache["cross"]
    B, K, C, T = unit.shape
    rows, cols = pair_indices(C)

    pairs = cross[..., rows, cols]
    modulus = np.abs(pairs)
    safe_modulus = np.where(modulus > 0, modulus, 1.0)
    weights = np.zeros((B, K, C, C), dtype=np.complex128)
    weights[..., rows, cols] = np.where(
        modulus > 0,
        grad_values.reshape(B, K, -1) * pairs / (safe_modulus * T),
        0.0,
    )

    grad_unit = weights @ unit + weights.conj().swapaxes(-1, -2) @ unit
    radial = (unit.conj() * grad_unit).real
    grad_z = (grad_unit - unit * radial) / result.cache["envelope"]
    return np.where(result.cache["clamped"], 0.0, grad_z)


def plv_direct_oracle(z1: np.ndarray, z2: np.ndarray) -> float:
    """
    PLV of one channel pair from explicit instantaneous phases.

    Reference implementation: (1/T) |sum_t exp(i (phi1 - phi2))|.
    """
    z1 = np.asarray(z1)
    z2 = np.asarray(z2)
    if z1.shape != z2.shape:
        raise ShapeMismatchError(f"Signals differ in shape: {z1.shape} vs {z2.shape}")
    if z1.size == 0:
        raise ValidationError("PLV of zero-length signals is undefined")
    phase_difference = np.angle(z1) - np.angle(z2)
    return float(np.abs(np.exp(1j * phase_difference).mean()))
