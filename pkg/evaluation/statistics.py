"""
Statistics

Class-difference statistics for validating learned features: pooled
variance two-sample t-tests and grand-averaged magnitude profiles.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy import stats

from common.errors import ShapeMismatchError, ValidationError
from dsp.spectral import bin_frequencies, rfft_array
from schemas.dataset import Dataset
from schemas.trial import TrialTensor

logger = logging.getLogger("spectral_miner.evaluation.statistics")


def two_sample_ttest(values_a: Sequence[float], values_b: Sequence[float]) -> tuple[float, float]:
    """
    Independent two-sample Student t-test with pooled variance.

    Returns:
        t statistic (a minus b) and the two-sided p-value

    Raises:
        ValidationError: If a group has fewer than 2 values or the pooled variance is 0
    """
    a = np.asarray(values_a, dtype=np.float64)
    b = np.asarray(values_b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValidationError(f"t-test needs at least 2 values per group, got {a.size} and {b.size}")
    pooled = ((a.size - 1) * a.var(ddof=1) + (b.size - 1) * b.var(ddof=1)) / (a.size + b.size - 2)
    if pooled <= 0.0:
        raise ValidationError("t-test undefined: pooled variance is zero")
    result = stats.ttest_ind(a, b, equal_var=True)
    return float(result.statistic), float(result.pvalue)


@dataclass
class MagnitudeProfile:
    """Relative change (A - B) / B of grand-averaged |X| per channel and bin."""
    freqs: np.ndarray
    relative_change: np.ndarray
    profile_a: np.ndarray
    profile_b: np.ndarray
    undefined: np.ndarray = field(repr=False)
    channel_names: list[str] = field(default_factory=list)

    @property
    def n_undefined(self) -> int:
        return int(self.undefined.sum())


def _trial_profile(trial: TrialTensor, grid: np.ndarray) -> np.ndarray:
    """|X| / N of every channel, interpolated onto ``grid`` when the native grid differs."""
    magnitude = np.abs(rfft_array(trial.data)) / trial.n_samples
    native = bin_frequencies(trial.n_samples, trial.fs)
    if native.shape == grid.shape and np.allclose(native, grid):
        return magnitude
    return np.stack([np.interp(grid, native, channel) for channel in magnitude])


def magnitude_profile_relative_change(
    dataset: Union[Dataset, list[TrialTensor]],
    class_a: int = 1,
    class_b: int = 0,
    freq_grid: Optional[np.ndarray] = None
) -> MagnitudeProfile:
    """
    Compare grand-averaged magnitude spectra of two classes.

    Args:
        dataset: Trials to average
        class_a: Numerator class
        class_b: Reference class
        freq_grid: Common grid in Hz; defaults to the native bin grid of the
            most common trial length

    Returns:
        MagnitudeProfile with relative change [C x F]; bins where the
        reference profile is zero are NaN and flagged as undefined
    """
    trials = dataset.trials if isinstance(dataset, Dataset) else list(dataset)
    channel_names = dataset.channel_names if isinstance(dataset, Dataset) else []
    members_a = [trial for trial in trials if trial.label == class_a]
    members_b = [trial for trial in trials if trial.label == class_b]
    if not members_a or not members_b:
        raise ValidationError(
            f"Both classes are needed: {len(members_a)} trials of class {class_a}, "
            f"{len(members_b)} of class {class_b}"
        )
    if len({trial.n_channels for trial in trials}) != 1:
        raise ShapeMismatchError("Trials must share one channel count")

    if freq_grid is None:
        common_length, _ = Counter(trial.n_samples for trial in trials).most_common(1)[0]
        fs = next(trial.fs for trial in trials if trial.n_samples == common_length)
        freq_grid = bin_frequencies(common_length, fs)
    grid = np.asarray(freq_grid, dtype=np.float64)

    profile_a = np.mean([_trial_profile(trial, grid) for trial in members_a], axis=0)
    profile_b = np.mean([_trial_profile(trial, grid) for trial in members_b], axis=0)

    undefined = profile_b == 0.0
    safe_b = np.where(undefined, 1.0, profile_b)
    relative = np.where(undefined, np.nan, (profile_a - profile_b) / safe_b)
    if undefined.any():
        logger.warning(f"Magnitude profile undefined at {int(undefined.sum())} (channel, bin) cell(s)")

    return MagnitudeProfile(
        freqs=grid,
        relative_change=relative,
        profile_a=profile_a,
        profile_b=profile_b,
        undefined=undefined,
        channel_names=list(channel_names),
    )
