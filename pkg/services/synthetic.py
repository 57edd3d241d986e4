"""
Synthetic Dataset Generator

Generates multichannel trials with known class differences so that
end-to-end training can be checked against ground truth:

- background: 1/f-shaped Gaussian noise per channel, unit std
- MagnitudeBoost: band-limited noise is added to one channel so that its
  expected in-band amplitude grows by ``gain`` (gains below 1 attenuate the
  band instead)
- CorrelationLink: the in-band component of both channels is blended with a
  shared band-limited source (weight ``strength``), keeping its power
- PhaseLock: the in-band component of both channels is replaced by one
  common oscillation with a fixed per-channel phase offset and slow phase
  jitter, keeping its power

Effects are applied to trials of their target class only. Each subject
then gets log-normal channel gains, and white sensor noise is added last.
Trials are returned unstandardized; loaders and the trainer standardize.
"""

import logging

import numpy as np
from scipy import fft as sp_fft

from dsp.spectral import analytic_array, one_sided_weights
from schemas.dataset import (
    CorrelationLink,
    Dataset,
    GroundTruth,
    MagnitudeBoost,
    PhaseLock,
    SynthSpec,
)
from schemas.trial import TrialTensor

logger = logging.getLogger("spectral_miner.services.synthetic")

JITTER_BAND_HZ = (1e-3, 1.0)


def _unit_std(x: np.ndarray) -> np.ndarray:
    std = x.std(axis=-1, keepdims=True)
    return np.divide(x, std, out=np.zeros_like(x), where=std > 0)


def band_mask(n_samples: int, fs: float, band: tuple[float, float]) -> np.ndarray:
    freqs = sp_fft.rfftfreq(n_samples, d=1.0 / fs)
    return (freqs >= band[0]) & (freqs <= band[1])


def band_component(x: np.ndarray, fs: float, band: tuple[float, float]) -> np.ndarray:
    """The part of ``x`` (last axis) inside ``band``."""
    n_samples = x.shape[-1]
    spectrum = sp_fft.rfft(x, axis=-1)
    spectrum[..., ~band_mask(n_samples, fs, band)] = 0.0
    return sp_fft.irfft(spectrum, n=n_samples, axis=-1)


def band_limited_noise(
    rng: np.random.Generator,
    n_signals: int,
    n_samples: int,
    fs: float,
    band: tuple[float, float]
) -> np.ndarray:
    """Unit-std Gaussian noise confined to ``band``, shape [n_signals x N]."""
    white = rng.standard_normal((n_signals, n_samples))
    return _unit_std(band_component(white, fs, band))


def pink_background(rng: np.random.Generator, n_channels: int, n_samples: int, fs: float) -> np.ndarray:
    """Unit-std Gaussian noise with a 1/f power spectrum and no DC."""
    spectrum = sp_fft.rfft(rng.standard_normal((n_channels, n_samples)), axis=-1)
    freqs = sp_fft.rfftfreq(n_samples, d=1.0 / fs)
    scale = np.zeros_like(freqs)
    scale[1:] = 1.0 / np.sqrt(freqs[1:])
    return _unit_std(sp_fft.irfft(spectrum * scale, n=n_samples, axis=-1))


def pink_band_std(n_samples: int, fs: float, band: tuple[float, float]) -> float:
    """Expected std of the in-band part of a unit-std :func:`pink_background`."""
    freqs = sp_fft.rfftfreq(n_samples, d=1.0 / fs)
    power = np.zeros_like(freqs)
    power[1:] = one_sided_weights(n_samples)[1:] / freqs[1:]
    return float(np.sqrt(power[band_mask(n_samples, fs, band)].sum() / power.sum()))


def _replace_band(channel: np.ndarray, in_band: np.ndarray, replacement: np.ndarray) -> np.ndarray:
    """Swap the in-band component for ``replacement`` rescaled to the same std."""
    return channel - in_band + in_band.std() * _unit_std(replacement)


def apply_magnitude_boost(x: np.ndarray, effect: MagnitudeBoost, fs: float, rng: np.random.Generator) -> None:
    """
    Add independent band-limited noise with (gain**2 - 1) times the expected
    in-band power of the background, so the in-band RMS ratio is ``gain``.
    """
    n_samples = x.shape[-1]
    if effect.gain > 1.0:
        level = np.sqrt(effect.gain ** 2 - 1.0) * pink_band_std(n_samples, fs, effect.band_hz)
        x[effect.channel] += level * band_limited_noise(rng, 1, n_samples, fs, effect.band_hz)[0]
    elif effect.gain < 1.0:
        # noise cannot lower power; attenuate the existing band
        x[effect.channel] += (effect.gain - 1.0) * band_component(x[effect.channel], fs, effect.band_hz)


def apply_correlation_link(x: np.ndarray, effect: CorrelationLink, fs: float, rng: np.random.Generator) -> None:
    n_samples = x.shape[-1]
    source = band_limited_noise(rng, 1, n_samples, fs, effect.band_hz)[0]
    mix = np.sqrt(1.0 - effect.strength ** 2)
    for channel in effect.channel_pair:
        in_band = band_component(x[channel], fs, effect.band_hz)
        blended = mix * _unit_std(in_band) + effect.strength * source
        x[channel] = _replace_band(x[channel], in_band, blended)


def apply_phase_lock(x: np.ndarray, effect: PhaseLock, fs: float, rng: np.random.Generator) -> None:
    n_samples = x.shape[-1]
    driver = band_limited_noise(rng, 1, n_samples, fs, effect.band_hz)[0]
    analytic = analytic_array(sp_fft.rfft(driver), n_samples)
    envelope, phase = np.abs(analytic), np.angle(analytic)
    for channel in effect.channel_pair:
        offset = rng.uniform(-np.pi, np.pi)
        wander = band_limited_noise(rng, 1, n_samples, fs, JITTER_BAND_HZ)[0]
        oscillation = envelope * np.cos(phase + offset + effect.jitter * wander)
        in_band = band_component(x[channel], fs, effect.band_hz)
        x[channel] = _replace_band(x[channel], in_band, oscillation)


def subject_gains(spec: SynthSpec, subject_index: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, subject_index]))
    return rng.lognormal(mean=0.0, sigma=spec.subject_gain_sigma, size=spec.n_channels)


def generate_trial(spec: SynthSpec, subject_index: int, trial_index: int, gains: np.ndarray) -> TrialTensor:
    """One raw trial; classes alternate with the trial index."""
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, subject_index, trial_index]))
    label = trial_index % 2
    x = pink_background(rng, spec.n_channels, spec.n_samples, spec.fs)

    for effect in spec.effects:
        if effect.target_class != label:
            continue
        if isinstance(effect, MagnitudeBoost):
            apply_magnitude_boost(x, effect, spec.fs, rng)
        elif isinstance(effect, CorrelationLink):
            apply_correlation_link(x, effect, spec.fs, rng)
        elif isinstance(effect, PhaseLock):
            apply_phase_lock(x, effect, spec.fs, rng)

    x *= gains[:, None]
    x += spec.noise_level * rng.standard_normal(x.shape)

    subject_id = f"s{subject_index:03d}"
    return TrialTensor(
        data=x,
        fs=spec.fs,
        label=label,
        subject_id=subject_id,
        trial_id=f"{subject_id}_t{trial_index:02d}",
    )


def generate_synthetic(spec: SynthSpec) -> tuple[Dataset, GroundTruth]:
    """
    Generate a dataset from a SynthSpec.

    Returns:
        Dataset of raw trials and the ground-truth record of planted effects
    """
    trials = []
    gains_by_subject = {}
    for s in range(spec.n_subjects):
        gains = subject_gains(spec, s)
        gains_by_subject[f"s{s:03d}"] = gains.tolist()
        for t in range(spec.trials_per_subject):
            trials.append(generate_trial(spec, s, t, gains))

    counts = {str(c): sum(trial.label == c for trial in trials) for c in (0, 1)}
    logger.info(
        f"Generated {len(trials)} trials ({spec.n_subjects} subjects, {spec.n_channels} channels, "
        f"{spec.duration_s} s at {spec.fs} Hz) with {len(spec.effects)} planted effect(s)"
    )
    dataset = Dataset(fs=spec.fs, channel_names=spec.resolved_channel_names(), trials=trials)
    ground_truth = GroundTruth(
        spec=spec,
        effects=list(spec.effects),
        subject_gains=gains_by_subject,
        class_counts=counts,
    )
    return dataset, ground_truth
