"""
Sampling

Class oversampling, training / evaluation windowing and length-grouped
mini-batching.
"""

import logging
from collections import defaultdict
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from common.errors import ValidationError
from dsp.spectral import restandardize
from schemas.trial import TrialBatch, TrialTensor

logger = logging.getLogger("spectral_miner.training.sampling")


class WindowMode(str, Enum):
    TRAIN = "train"
    EVAL = "eval"


def oversample(labels: Sequence[int], rng: np.random.Generator) -> np.ndarray:
    """
    Indices that balance a binary training set.

    The majority class is kept once. Every minority index is repeated
    ``target // n_minority`` times and the remainder is drawn without
    replacement, so minority repeat counts differ by at most one.

    Raises:
        ValidationError: If only one class is present
    """
    labels = np.asarray(labels)
    by_class = [np.flatnonzero(labels == c) for c in (0, 1)]
    if any(len(indices) == 0 for indices in by_class):
        raise ValidationError(
            f"Oversampling needs both classes, got counts {[len(i) for i in by_class]}"
        )

    majority, minority = sorted(by_class, key=len, reverse=True)
    repeats, remainder = divmod(len(majority), len(minority))
    extra = rng.choice(minority, size=remainder, replace=False) if remainder else np.array([], dtype=int)
    return np.concatenate([majority, np.tile(minority, repeats), np.sort(extra)]).astype(int)


def window_length(window_s: float, fs: float) -> int:
    return int(round(window_s * fs))


def sample_windows(
    trial: TrialTensor,
    mode: WindowMode,
    window_s: Optional[float] = None,
    windows_per_epoch: int = 1,
    rng: Optional[np.random.Generator] = None
) -> list[TrialTensor]:
    """
    Cut a trial into windows; every window is re-standardized.

    Train mode draws ``windows_per_epoch`` seeded uniform start offsets.
    Eval mode tiles the trial with consecutive non-overlapping windows and
    drops the remainder. Without ``window_s`` the whole trial is returned.

    Raises:
        ValidationError: If the trial is shorter than one window
    """
    if window_s is None:
        return [trial]

    length = window_length(window_s, trial.fs)
    if length < 1:
        raise ValidationError(f"Window of {window_s} s is shorter than one sample at {trial.fs} Hz")
    if trial.n_samples < length:
        raise ValidationError(
            f"Trial {trial.trial_id or '<unnamed>'} has {trial.n_samples} samples, "
            f"shorter than a {window_s} s window ({length} samples)"
        )

    if WindowMode(mode) == WindowMode.TRAIN:
        if rng is None:
            raise ValidationError("Training windows need a random generator")
        offsets = rng.integers(0, trial.n_samples - length + 1, size=windows_per_epoch)
    else:
        offsets = np.arange(trial.n_samples // length) * length

    return [
        restandardize(trial.model_copy(update={"data": trial.data[:, start:start + length]}))
        for start in offsets.tolist()
    ]


def make_batches(
    windows: list[TrialTensor],
    batch_size: int,
    drop_small: bool = True,
    prefix: str = "batch"
) -> list[TrialBatch]:
    """
    Chunk windows into batches of equal length, keeping their order.

    Windows are grouped by sample count first (groups in order of first
    appearance). With ``drop_small`` a trailing chunk of fewer than two
    windows is dropped, since train-mode batch normalization needs B >= 2.
    """
    groups: dict[int, list[TrialTensor]] = defaultdict(list)
    for window in windows:
        groups[window.n_samples].append(window)

    batches = []
    for members in groups.values():
        for start in range(0, len(members), batch_size):
            chunk = members[start:start + batch_size]
            if drop_small and len(chunk) < 2:
                logger.debug(f"Dropping a trailing batch of {len(chunk)} window(s)")
                continue
            batches.append(TrialBatch.from_trials(chunk, batch_id=f"{prefix}-{len(batches)}"))
    return batches
