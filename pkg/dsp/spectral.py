"""
Spectral Primitives

Real FFT, inverse FFT, analytic-signal construction and trial
standardization. Transforms use the unnormalized-forward / (1/N)-inverse
convention of ``scipy.fft`` and operate on the last axis, so the array
helpers accept any leading batch shape.
"""

import logging

import numpy as np
from scipy import fft as sp_fft

from common.errors import ShapeMismatchError, ValidationError
from schemas.trial import Spectrum, TrialTensor

logger = logging.getLogger("spectral_miner.dsp.spectral")


def n_bins(n_samples: int) -> int:
    """Number of one-sided bins for a real signal of length ``n_samples``."""
    return n_samples // 2 + 1


def bin_frequencies(n_samples: int, fs: float) -> np.ndarray:
    """Bin centre frequencies ``k * fs / N`` of the one-sided spectrum."""
    return sp_fft.rfftfreq(n_samples, d=1.0 / fs)


def one_sided_weights(n_samples: int) -> np.ndarray:
    """
    Multiplicity of each one-sided bin in the full spectrum.

    DC (and Nyquist, for even N) occur once; every other bin stands for a
    positive and a negative frequency. The same weights double the
    positive bins when building an analytic signal.
    """
    weights = np.full(n_bins(n_samples), 2.0)
    weights[0] = 1.0
    if n_samples % 2 == 0:
        weights[-1] = 1.0
    return weights


# ============================================================================
# Standardization
# ============================================================================

def standardize_array(data: np.ndarray) -> tuple[np.ndarray, bool]:
    """
    Standardize by one scalar mean and population std over all values.

    Returns:
        Standardized copy and a flag that is True for zero-variance input
        (in which case the copy is all zeros)
    """
    data = np.asarray(data, dtype=np.float64)
    if data.size == 0:
        raise ValidationError("Cannot standardize an empty trial")
    if not np.all(np.isfinite(data)):
        raise ValidationError("Trial contains non-finite values")
    mean = data.mean()
    std = data.std()
    if std == 0.0:
        return np.zeros_like(data), True
    return (data - mean) / std, False


def standardize_trial(
    raw: np.ndarray,
    fs: float,
    label: int,
    subject_id: str,
    trial_id: str = ""
) -> TrialTensor:
    """
    Build a standardized TrialTensor from a raw [C x N] recording.

    Constant recordings come back as zeros with ``degenerate=True`` so that
    batch pipelines can skip them.
    """
    data, degenerate = standardize_array(raw)
    if degenerate:
        logger.warning(f"Trial {trial_id or '<unnamed>'} of subject {subject_id} has zero variance")
    return TrialTensor(
        data=data,
        fs=fs,
        label=label,
        subject_id=subject_id,
        trial_id=trial_id,
        degenerate=degenerate,
    )


def restandardize(trial: TrialTensor) -> TrialTensor:
    """Standardize an existing trial (used on every sampled window)."""
    data, degenerate = standardize_array(trial.data)
    return trial.model_copy(update={"data": data, "degenerate": degenerate or trial.degenerate})


# ============================================================================
# Transforms
# ============================================================================

def rfft_array(x: np.ndarray) -> np.ndarray:
    """One-sided spectrum along the last axis."""
    return sp_fft.rfft(x, axis=-1)


def irfft_array(bins: np.ndarray, n_samples: int) -> np.ndarray:
    """Real inverse of :func:`rfft_array` along the last axis."""
    if bins.shape[-1] != n_bins(n_samples):
        raise ShapeMismatchError(
            f"Spectrum has {bins.shape[-1]} bins, expected {n_bins(n_samples)} for {n_samples} samples"
        )
    return sp_fft.irfft(bins, n=n_samples, axis=-1)


def analytic_array(bins: np.ndarray, n_samples: int) -> np.ndarray:
    """
    Analytic signal from a one-sided spectrum by the one-sided method.

    Strictly positive bins are doubled, DC and Nyquist kept, negative
    frequencies zeroed, then a complex inverse transform is applied.
    """
    n_one_sided = n_bins(n_samples)
    if bins.shape[-1] != n_one_sided:
        raise ShapeMismatchError(
            f"Spectrum has {bins.shape[-1]} bins, expected {n_one_sided} for {n_samples} samples"
        )
    full = np.zeros(bins.shape[:-1] + (n_samples,), dtype=np.complex128)
    full[..., :n_one_sided] = bins * one_sided_weights(n_samples)
    return sp_fft.ifft(full, axis=-1)


def irfft_adjoint(grad_time: np.ndarray, n_samples: int) -> np.ndarray:
    """
    Pull a real time-domain gradient back through :func:`irfft_array`.

    Returns the complex gradient (d/dRe + i d/dIm) w.r.t. the one-sided bins.
    """
    return rfft_array(grad_time) * (one_sided_weights(n_samples) / n_samples)


def analytic_adjoint(grad_analytic: np.ndarray, n_samples: int) -> np.ndarray:
    """Pull a complex gradient back through :func:`analytic_array`."""
    full = sp_fft.fft(grad_analytic, axis=-1)
    return full[..., :n_bins(n_samples)] * (one_sided_weights(n_samples) / n_samples)


def rfft(trial: TrialTensor) -> Spectrum:
    """One-sided spectrum of every channel of a trial."""
    return Spectrum(
        bins=rfft_array(trial.data),
        bin_freqs=bin_frequencies(trial.n_samples, trial.fs),
        n_samples=trial.n_samples,
        fs=trial.fs,
    )


def irfft(spec: Spectrum, n_samples: int) -> np.ndarray:
    """Real [C x N] signal of a spectrum produced for ``n_samples``."""
    if spec.n_samples != n_samples:
        raise ShapeMismatchError(
            f"Spectrum was computed for {spec.n_samples} samples, not {n_samples}"
        )
    return irfft_array(spec.bins, n_samples)


def analytic_signal(filtered_spec: Spectrum, n_samples: int) -> np.ndarray:
    """Complex [C x N] analytic signal ``x + iH(x)`` of a one-sided spectrum."""
    if filtered_spec.n_samples != n_samples:
        raise ShapeMismatchError(
            f"Spectrum was computed for {filtered_spec.n_samples} samples, not {n_samples}"
        )
    return analytic_array(filtered_spec.bins, n_samples)


def spectral_energy(spec: Spectrum) -> np.ndarray:
    """Per-channel time-domain energy recovered from the one-sided spectrum (Parseval)."""
    weights = one_sided_weights(spec.n_samples)
    return (weights * np.abs(spec.bins) ** 2).sum(axis=-1) / spec.n_samples
