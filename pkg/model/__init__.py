"""
Spectral Miner - Model

Classifier head, model state with checkpoints, and the gradient engine.
"""

from model.head import (
    Mode,
    BatchNormState,
    ClassifierParams,
    batchnorm_forward,
    predict,
    loss,
    head_forward,
    head_backward,
)
from model.state import ModelState, init_model_state, save_checkpoint, load_checkpoint
from model.gradients import GradientTape, extract_features, backward, predict_proba

__all__ = [
    "Mode",
    "BatchNormState",
    "ClassifierParams",
    "batchnorm_forward",
    "predict",
    "loss",
    "head_forward",
    "head_backward",
    "ModelState",
    "init_model_state",
    "save_checkpoint",
    "load_checkpoint",
    "GradientTape",
    "extract_features",
    "backward",
    "predict_proba",
]
