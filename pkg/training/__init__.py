"""
Spectral Miner - Training

Optimizer, sampling and the training loop.
"""

from training.optimizer import cosine_lr, nesterov_step, apply_update
from training.sampling import WindowMode, oversample, sample_windows, make_batches
from training.trainer import TrainingResult, prepare_trials, plan_epoch, train

__all__ = [
    "cosine_lr",
    "nesterov_step",
    "apply_update",
    "WindowMode",
    "oversample",
    "sample_windows",
    "make_batches",
    "TrainingResult",
    "prepare_trials",
    "plan_epoch",
    "train",
]
