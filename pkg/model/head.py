"""
Classifier Head

Non-affine batch normalization followed by a linear layer with sigmoid
output (logistic regression), trained on mean squared error plus an L1
penalty on the weights. With no learnable scale or shift inside batch
normalization, the classifier weights are directly comparable
feature-importance scores.
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import expit

from common.errors import ShapeMismatchError, ValidationError

logger = logging.getLogger("spectral_miner.model.head")


class Mode(str, Enum):
    TRAIN = "train"
    EVAL = "eval"


@dataclass
class BatchNormState:
    """Running statistics of the non-affine batch normalization."""
    running_mean: np.ndarray
    running_var: np.ndarray
    momentum: float = 0.1
    eps: float = 1e-5
    mode: Mode = Mode.TRAIN

    @classmethod
    def create(cls, D: int, momentum: float = 0.1, eps: float = 1e-5) -> "BatchNormState":
        return cls(running_mean=np.zeros(D), running_var=np.ones(D), momentum=momentum, eps=eps)

    @property
    def dim(self) -> int:
        return self.running_mean.shape[0]

    def train(self) -> "BatchNormState":
        self.mode = Mode.TRAIN
        return self

    def eval(self) -> "BatchNormState":
        self.mode = Mode.EVAL
        return self

    def copy(self) -> "BatchNormState":
        return BatchNormState(
            running_mean=self.running_mean.copy(),
            running_var=self.running_var.copy(),
            momentum=self.momentum,
            eps=self.eps,
            mode=self.mode,
        )


@dataclass
class ClassifierParams:
    """Linear classifier weights and bias."""
    weights: np.ndarray
    bias: float = 0.0

    @classmethod
    def zeros(cls, D: int) -> "ClassifierParams":
        return cls(weights=np.zeros(D), bias=0.0)

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    def copy(self) -> "ClassifierParams":
        return ClassifierParams(weights=self.weights.copy(), bias=float(self.bias))


@dataclass
class HeadCache:
    """Intermediates of one head forward pass."""
    normalized: np.ndarray
    inv_std: np.ndarray
    probabilities: np.ndarray
    mode: Mode


@dataclass
class HeadGradients:
    weights: np.ndarray
    bias: float
    features: np.ndarray


def _normalize(
    features: np.ndarray,
    state: BatchNormState,
    track: bool = True
) -> tuple[np.ndarray, np.ndarray]:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != state.dim:
        raise ShapeMismatchError(
            f"Expected features [B x {state.dim}], got shape {features.shape}"
        )

    if state.mode == Mode.EVAL:
        inv_std = 1.0 / np.sqrt(state.running_var + state.eps)
        return (features - state.running_mean) * inv_std, inv_std

    if features.shape[0] < 2:
        raise ValidationError(f"Train-mode batch normalization needs B >= 2, got {features.shape[0]}")
    mean = features.mean(axis=0)
    var = features.var(axis=0)
    inv_std = 1.0 / np.sqrt(var + state.eps)
    if track:
        state.running_mean = (1.0 - state.momentum) * state.running_mean + state.momentum * mean
        state.running_var = (1.0 - state.momentum) * state.running_var + state.momentum * var
    return (features - mean) * inv_std, inv_std


def batchnorm_forward(features: np.ndarray, state: BatchNormState, track: bool = True) -> np.ndarray:
    """
    Standardize a [B x D] feature batch.

    Train mode normalizes with the batch mean and population variance and,
    when ``track`` is set, folds them into the running statistics. Eval
    mode normalizes with the running statistics and never changes them.
    """
    normalized, _ = _normalize(features, state, track)
    return normalized


def batchnorm_backward(grad: np.ndarray, cache: HeadCache) -> np.ndarray:
    """Gradient w.r.t. the raw features, including the batch mean/variance terms in train mode."""
    if cache.mode == Mode.EVAL:
        return grad * cache.inv_std
    x_hat = cache.normalized
    return cache.inv_std * (
        grad - grad.mean(axis=0) - x_hat * (grad * x_hat).mean(axis=0)
    )


def predict(features_std: np.ndarray, params: ClassifierParams) -> np.ndarray:
    """Sigmoid probabilities of class 1."""
    return expit(features_std @ params.weights + params.bias)


def loss(
    preds: np.ndarray,
    targets: np.ndarray,
    params: ClassifierParams,
    gamma: float = 0.0
) -> float:
    """Mean squared error plus gamma times the L1 norm of the weights (bias excluded)."""
    preds = np.asarray(preds, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if preds.shape != targets.shape:
        raise ShapeMismatchError(f"Predictions {preds.shape} and targets {targets.shape} differ")
    return float(np.mean((preds - targets) ** 2) + gamma * np.abs(params.weights).sum())


def head_forward(
    features: np.ndarray,
    state: BatchNormState,
    params: ClassifierParams,
    track: bool = True
) -> HeadCache:
    """Batch normalization and classifier in one pass, keeping what backward needs."""
    normalized, inv_std = _normalize(features, state, track)
    return HeadCache(
        normalized=normalized,
        inv_std=inv_std,
        probabilities=predict(normalized, params),
        mode=state.mode,
    )


def head_backward(
    cache: HeadCache,
    targets: np.ndarray,
    params: ClassifierParams,
    gamma: float = 0.0
) -> HeadGradients:
    """
    Exact gradients of the loss w.r.t. weights, bias and the raw features.

    The L1 subgradient is sign(w), taken as 0 at w = 0.
    """
    probs = cache.probabilities
    targets = np.asarray(targets, dtype=np.float64)
    B = probs.shape[0]

    grad_logit = 2.0 * (probs - targets) / B * probs * (1.0 - probs)
    grad_weights = cache.normalized.T @ grad_logit + gamma * np.sign(params.weights)
    grad_bias = float(grad_logit.sum())
    grad_normalized = np.outer(grad_logit, params.weights)

    return HeadGradients(
        weights=grad_weights,
        bias=grad_bias,
        features=batchnorm_backward(grad_normalized, cache),
    )
