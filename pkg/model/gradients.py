"""
Gradient Engine

Forward pipeline (rfft -> filter bank -> feature module -> head) and its
reverse pass:

    loss -> head -> features -> irfft / analytic signal -> |F| -> (mu, h, beta_raw)

The Fourier stages are linear, so their gradients are the adjoint
transforms in ``dsp.spectral``. The filter phase has unit modulus, so
only |F| carries trainable parameters.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from common.errors import NumericalError, ShapeMismatchError, ValidationError
from dsp.features import (
    FeatureResult,
    band_magnitude,
    correlation_backward,
    correlation_features,
    plv_backward,
    plv_features,
)
from dsp.filterbank import (
    FilterBank,
    filter_spectra,
    gg_magnitude_and_grads,
    linear_phase,
    validate_layout,
)
from dsp.spectral import (
    analytic_adjoint,
    analytic_array,
    bin_frequencies,
    irfft_adjoint,
    irfft_array,
    rfft_array,
)
from model.head import head_backward, head_forward, loss
from model.state import ModelState
from schemas.filters import FeatureKind, FilterLayout
from schemas.trial import TrialBatch

logger = logging.getLogger("spectral_miner.model.gradients")


@dataclass
class PipelineCache:
    """Intermediates of the feature forward pass."""
    feature_kind: FeatureKind
    bins: np.ndarray
    freqs: np.ndarray
    phase: np.ndarray
    n_samples: int
    result: FeatureResult


@dataclass
class GradientTape:
    """Per-parameter gradients of one batch, shaped like the parameters."""
    mu: np.ndarray
    h: np.ndarray
    beta_raw: np.ndarray
    weights: np.ndarray
    bias: float = 0.0
    batch_id: Optional[str] = None
    feature_grads: Optional[np.ndarray] = field(default=None, repr=False)
    probabilities: Optional[np.ndarray] = field(default=None, repr=False)

    @classmethod
    def zeros_like(cls, state: ModelState, batch_id: Optional[str] = None) -> "GradientTape":
        return cls(
            mu=np.zeros_like(state.bank.mu),
            h=np.zeros_like(state.bank.h),
            beta_raw=np.zeros_like(state.bank.beta_raw),
            weights=np.zeros_like(state.head.weights),
            bias=0.0,
            batch_id=batch_id,
        )

    def as_dict(self) -> dict[str, np.ndarray]:
        return {
            "mu": self.mu,
            "h": self.h,
            "beta_raw": self.beta_raw,
            "weights": self.weights,
            "bias": np.asarray(self.bias, dtype=np.float64),
        }

    def check_finite(self) -> None:
        """
        Raises:
            NumericalError: Naming the first parameter with a NaN/Inf gradient
        """
        for name, grad in self.as_dict().items():
            if not np.all(np.isfinite(grad)):
                bad = np.argwhere(~np.isfinite(np.atleast_1d(grad)))
                where = tuple(bad[0].tolist()) if bad.size else ()
                raise NumericalError(
                    f"Non-finite gradient at index {where} in batch {self.batch_id or '<unnamed>'}",
                    parameter=name,
                )


def extract_features(
    data: np.ndarray,
    bank: FilterBank,
    feature_kind: FeatureKind,
    fs: float
) -> tuple[FeatureResult, PipelineCache]:
    """
    Filter a batch of trials and compute its feature vectors.

    Args:
        data: Standardized trials [B, C, N] (or a single [C, N] trial)
        bank: Filter bank
        feature_kind: Feature module
        fs: Sampling rate of ``data``

    Returns:
        FeatureResult with values [B, D] and the cache for the reverse pass
    """
    feature_kind = FeatureKind(feature_kind)
    validate_layout(feature_kind, bank.layout)
    data = np.asarray(data, dtype=np.float64)
    if data.ndim == 2:
        data = data[None]
    if data.ndim != 3 or data.shape[1] != bank.n_channels:
        raise ShapeMismatchError(
            f"Expected trials [B x {bank.n_channels} x N], got shape {data.shape}"
        )

    n_samples = data.shape[-1]
    bins = rfft_array(data)
    freqs = bin_frequencies(n_samples, fs)
    phase = linear_phase(freqs, bank.group_delay_s)
    magnitudes = bank.magnitudes(freqs)

    if feature_kind == FeatureKind.MAGNITUDE:
        result = band_magnitude(np.abs(bins)[:, None] * magnitudes)
    else:
        maps = filter_spectra(bins, magnitudes * phase)
        if feature_kind == FeatureKind.CORRELATION:
            result = correlation_features(irfft_array(maps, n_samples))
        else:
            result = plv_features(analytic_array(maps, n_samples))

    return result, PipelineCache(
        feature_kind=feature_kind,
        bins=bins,
        freqs=freqs,
        phase=phase,
        n_samples=n_samples,
        result=result,
    )


def features_backward(
    grad_features: np.ndarray,
    cache: PipelineCache,
    bank: FilterBank
) -> dict[str, np.ndarray]:
    """Gradients of the loss w.r.t. mu, h and beta_raw from a [B, D] feature gradient."""
    bins = cache.bins
    B, C, F = bins.shape

    if cache.feature_kind == FeatureKind.MAGNITUDE:
        grad_maps = grad_features.reshape(B, bank.n_maps, C)
        grad_magnitude = np.einsum("bkc,bcf->kcf", grad_maps, np.abs(bins)) / F
    else:
        if cache.feature_kind == FeatureKind.CORRELATION:
            grad_time = correlation_backward(grad_features, cache.result)
            grad_spectra = irfft_adjoint(grad_time, cache.n_samples)
        else:
            grad_analytic = plv_backward(grad_features, cache.result)
            grad_spectra = analytic_adjoint(grad_analytic, cache.n_samples)
        # maps = bins * |F| * phase, with |F| real
        grad_magnitude = np.real(grad_spectra.conj() * (bins * cache.phase)[:, None]).sum(axis=0)

    if bank.layout == FilterLayout.SHARED:
        grad_magnitude = grad_magnitude.sum(axis=1, keepdims=True)

    _, d_mu, d_h, d_beta_raw = gg_magnitude_and_grads(
        bank.mu[..., None], bank.h[..., None], bank.beta_raw[..., None], cache.freqs
    )
    return {
        "mu": (grad_magnitude * d_mu).sum(axis=-1),
        "h": (grad_magnitude * d_h).sum(axis=-1),
        "beta_raw": (grad_magnitude * d_beta_raw).sum(axis=-1),
    }


def backward(
    batch: TrialBatch,
    state: ModelState,
    gamma: float = 0.0,
    track: bool = True
) -> tuple[GradientTape, float]:
    """
    Forward and reverse pass of one batch.

    Batch normalization runs in the state's current mode; in train mode
    the running statistics are updated unless ``track`` is False.

    Returns:
        Gradients of every trainable scalar and the batch loss

    Raises:
        NumericalError: If the loss or any gradient is NaN/Inf
    """
    if batch.fs != state.fs:
        raise ValidationError(f"Batch sampled at {batch.fs} Hz, model expects {state.fs} Hz")

    result, cache = extract_features(batch.data, state.bank, state.feature_kind, batch.fs)
    if not np.all(np.isfinite(result.values)):
        raise NumericalError(
            f"Non-finite features in batch {batch.batch_id or '<unnamed>'}",
            parameter="features",
        )

    head_cache = head_forward(result.values, state.bn, state.head, track=track)
    batch_loss = loss(head_cache.probabilities, batch.labels, state.head, gamma)
    if not np.isfinite(batch_loss):
        raise NumericalError(f"Loss is {batch_loss} in batch {batch.batch_id or '<unnamed>'}", parameter="loss")

    head_grads = head_backward(head_cache, batch.labels, state.head, gamma)
    filter_grads = features_backward(head_grads.features, cache, state.bank)

    tape = GradientTape(
        mu=filter_grads["mu"],
        h=filter_grads["h"],
        beta_raw=filter_grads["beta_raw"],
        weights=head_grads.weights,
        bias=head_grads.bias,
        batch_id=batch.batch_id,
        feature_grads=head_grads.features,
        probabilities=head_cache.probabilities,
    )
    tape.check_finite()
    return tape, batch_loss


def predict_proba(state: ModelState, data: np.ndarray, fs: Optional[float] = None) -> np.ndarray:
    """Class-1 probabilities of a [B, C, N] batch in the state's batch-norm mode, without tracking."""
    result, _ = extract_features(data, state.bank, state.feature_kind, fs or state.fs)
    return head_forward(result.values, state.bn, state.head, track=False).probabilities
