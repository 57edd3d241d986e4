"""
Trainer

Mini-batch SGD over oversampled, windowed trials with Nesterov momentum,
cosine learning-rate decay to zero and filter clamping after every step.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from common.errors import NumericalError, ShapeMismatchError, ValidationError
from dsp.spectral import restandardize
from model.gradients import backward
from model.state import ModelState, init_model_state
from schemas.reports import EpochRecord
from schemas.training import TrainConfig
from schemas.trial import TrialBatch, TrialTensor
from training.optimizer import apply_update, cosine_lr
from training.sampling import WindowMode, make_batches, oversample, sample_windows

logger = logging.getLogger("spectral_miner.training.trainer")


@dataclass
class TrainingResult:
    """Final Eval-mode model and the per-epoch history."""
    state: ModelState
    history: list[EpochRecord] = field(default_factory=list)


def prepare_trials(trials: list[TrialTensor]) -> list[TrialTensor]:
    """Standardize every trial and drop degenerate ones."""
    prepared = []
    for trial in trials:
        trial = restandardize(trial)
        if trial.degenerate:
            logger.warning(f"Skipping degenerate trial {trial.trial_id or '<unnamed>'} (subject {trial.subject_id})")
            continue
        prepared.append(trial)
    return prepared


def plan_epoch(
    trials: list[TrialTensor],
    config: TrainConfig,
    rng: np.random.Generator,
    epoch: int = 0
) -> list[TrialBatch]:
    """Oversample, draw fresh windows for every occurrence, shuffle and batch."""
    order = oversample([trial.label for trial in trials], rng)
    windows = []
    for index in order.tolist():
        windows.extend(sample_windows(
            trials[index],
            WindowMode.TRAIN,
            config.window_s,
            config.windows_per_epoch,
            rng,
        ))
    shuffled = [windows[i] for i in rng.permutation(len(windows)).tolist()]
    return make_batches(shuffled, config.batch_size, prefix=f"epoch{epoch}")


def train(
    config: TrainConfig,
    train_trials: list[TrialTensor],
    channel_names: Optional[list[str]] = None,
    rng: Optional[np.random.Generator] = None
) -> TrainingResult:
    """
    Train a model from scratch.

    Args:
        config: Training configuration
        train_trials: Training trials (standardized here; degenerate ones are skipped)
        channel_names: Electrode names stored with the model
        rng: Generator for initialization, sampling and shuffling
            (defaults to one seeded with ``config.seed``)

    Returns:
        TrainingResult with an Eval-mode ModelState

    Raises:
        ValidationError: For empty, single-class or inconsistent training sets
        NumericalError: If a loss or gradient becomes NaN/Inf
    """
    # Import here to avoid circular imports
    from evaluation.metrics import uar

    trials = prepare_trials(train_trials)
    if not trials:
        raise ValidationError("No usable training trials")
    rates = {trial.fs for trial in trials}
    if len(rates) != 1:
        raise ValidationError(f"Training trials must share one sampling rate, got {sorted(rates)}")
    channels = {trial.n_channels for trial in trials}
    if len(channels) != 1:
        raise ShapeMismatchError(f"Training trials must share one channel count, got {sorted(channels)}")
    fs = rates.pop()

    rng = rng if rng is not None else np.random.default_rng(config.seed)
    state = init_model_state(config, channels.pop(), fs, channel_names, rng)
    state.bn.train()

    logger.info(
        f"Training {config.feature_kind.value} model on {len(trials)} trials: "
        f"{config.epochs} epochs, batch {config.batch_size}, lr0 {config.lr0} (filters x{config.filter_lr_scale}), "
        f"gamma {config.gamma}"
    )

    history: list[EpochRecord] = []
    total_steps: Optional[int] = None
    lr = config.lr0
    for epoch in range(config.epochs):
        batches = plan_epoch(trials, config, rng, epoch)
        if not batches:
            raise ValidationError("Training set yields no batch of at least 2 windows")
        if total_steps is None:
            total_steps = config.epochs * len(batches)

        losses, probabilities, labels = [], [], []
        for batch in batches:
            tape, batch_loss = backward(batch, state, config.gamma)
            lr = cosine_lr(min(state.step + 1, total_steps), total_steps, config.lr0)
            apply_update(state, tape, lr, config)
            losses.append(batch_loss)
            probabilities.append(tape.probabilities)
            labels.append(batch.labels)

        mean_loss = float(np.mean(losses))
        if not np.isfinite(mean_loss):
            raise NumericalError(f"Mean loss is {mean_loss} in epoch {epoch}", parameter="loss")
        labels_epoch = np.concatenate(labels)
        predicted = (np.concatenate(probabilities) > 0.5).astype(int)
        train_uar = uar(predicted, labels_epoch) if len(np.unique(labels_epoch)) == 2 else float("nan")

        history.append(EpochRecord(epoch=epoch, mean_loss=mean_loss, train_uar=train_uar, lr=lr))
        logger.debug(f"Epoch {epoch}: loss {mean_loss:.5f}, train UAR {train_uar:.4f}, lr {lr:.3e}")

    state.bn.eval()
    last = history[-1]
    logger.info(
        f"Training finished after {state.step} steps: loss {last.mean_loss:.5f}, train UAR {last.train_uar:.4f}"
    )
    return TrainingResult(state=state, history=history)
