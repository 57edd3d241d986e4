"""
Optimizer

Cosine learning-rate decay to zero and SGD with Nesterov momentum, with
separate momenta for filter and classifier parameters.
"""

import math

import numpy as np

from common.errors import ValidationError
from model.gradients import GradientTape
from model.state import FILTER_PARAMS, ModelState
from schemas.training import TrainConfig


def cosine_lr(t: int, T: int, lr0: float) -> float:
    """lr0 * 0.5 * (1 + cos(pi * t / T)) for 0 <= t <= T."""
    if T < 1:
        raise ValidationError(f"Total steps must be >= 1, got {T}")
    if not 0 <= t <= T:
        raise ValidationError(f"Step {t} outside [0, {T}]")
    return lr0 * 0.5 * (1.0 + math.cos(math.pi * t / T))


def nesterov_step(
    params: np.ndarray,
    grads: np.ndarray,
    velocities: np.ndarray,
    lr: float,
    momentum: float
) -> tuple[np.ndarray, np.ndarray]:
    """
    One Nesterov-momentum update:

        v <- m * v + g
        p <- p - lr * (g + m * v)

    Returns:
        New parameters and velocities (inputs are not modified)
    """
    velocities = momentum * velocities + grads
    params = params - lr * (grads + momentum * velocities)
    return params, velocities


def apply_update(state: ModelState, tape: GradientTape, lr: float, config: TrainConfig) -> None:
    """
    Step every trainable array of ``state`` in place and re-project the filters.

    Filters use ``momentum_filters`` and ``lr * filter_lr_scale``; the
    classifier uses ``momentum_head`` and ``lr``.
    """
    grads = tape.as_dict()
    params = state.parameters()
    for name, value in params.items():
        if name in FILTER_PARAMS:
            rate, momentum = lr * config.filter_lr_scale, config.momentum_filters
        else:
            rate, momentum = lr, config.momentum_head
        new_value, state.velocities[name] = nesterov_step(
            value, grads[name], state.velocities[name], rate, momentum
        )
        if name == "bias":
            state.head.bias = float(new_value)
        else:
            value[...] = new_value

    state.bank.clamp(config.clamp.resolve(state.fs))
    state.step += 1
