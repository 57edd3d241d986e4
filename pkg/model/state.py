"""
Model State

Filter bank, batch-norm statistics, classifier and optimizer velocities of
one model, plus JSON checkpoints that rebuild it exactly.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from common.errors import NotFoundError, ValidationError
from dsp.features import count_parameters, feature_dim
from dsp.filterbank import FilterBank, init_bank, layout_for
from model.head import BatchNormState, ClassifierParams
from schemas.filters import FeatureKind
from schemas.reports import CheckpointRecord, HeadRecord
from schemas.training import TrainConfig

logger = logging.getLogger("spectral_miner.model.state")

FILTER_PARAMS = ("mu", "h", "beta_raw")
HEAD_PARAMS = ("weights", "bias")


@dataclass
class ModelState:
    """Everything a trained model consists of."""
    feature_kind: FeatureKind
    bank: FilterBank
    bn: BatchNormState
    head: ClassifierParams
    fs: float
    channel_names: list[str]
    velocities: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0

    @property
    def n_channels(self) -> int:
        return self.bank.n_channels

    @property
    def feature_dim(self) -> int:
        return self.head.dim

    @property
    def n_parameters(self) -> int:
        return self.bank.n_parameters + self.head.dim + 1

    def parameters(self) -> dict[str, np.ndarray]:
        """Trainable arrays by name (bias as a 0-d array)."""
        return {
            "mu": self.bank.mu,
            "h": self.bank.h,
            "beta_raw": self.bank.beta_raw,
            "weights": self.head.weights,
            "bias": np.asarray(self.head.bias, dtype=np.float64),
        }

    def zero_velocities(self) -> None:
        self.velocities = {name: np.zeros_like(value) for name, value in self.parameters().items()}

    def copy(self) -> "ModelState":
        return ModelState(
            feature_kind=self.feature_kind,
            bank=self.bank.copy(),
            bn=self.bn.copy(),
            head=self.head.copy(),
            fs=self.fs,
            channel_names=list(self.channel_names),
            velocities={name: value.copy() for name, value in self.velocities.items()},
            step=self.step,
        )

    def to_record(self, config: TrainConfig) -> CheckpointRecord:
        return CheckpointRecord(
            config=config,
            fs=self.fs,
            channel_names=self.channel_names,
            bank=self.bank.to_record(self.channel_names),
            head=HeadRecord(
                weights=self.head.weights.tolist(),
                bias=float(self.head.bias),
                running_mean=self.bn.running_mean.tolist(),
                running_var=self.bn.running_var.tolist(),
                bn_momentum=self.bn.momentum,
                bn_eps=self.bn.eps,
            ),
            step=self.step,
        )

    @classmethod
    def from_record(cls, record: CheckpointRecord) -> "ModelState":
        bank = FilterBank.from_record(record.bank)
        kind = record.config.feature_kind
        expected = feature_dim(kind, bank.n_channels, bank.n_maps)
        if len(record.head.weights) != expected:
            raise ValidationError(
                f"Checkpoint head has {len(record.head.weights)} weights, {kind.value} expects {expected}"
            )
        state = cls(
            feature_kind=kind,
            bank=bank,
            bn=BatchNormState(
                running_mean=np.array(record.head.running_mean, dtype=np.float64),
                running_var=np.array(record.head.running_var, dtype=np.float64),
                momentum=record.head.bn_momentum,
                eps=record.head.bn_eps,
            ).eval(),
            head=ClassifierParams(
                weights=np.array(record.head.weights, dtype=np.float64),
                bias=record.head.bias,
            ),
            fs=record.fs,
            channel_names=list(record.channel_names),
            step=record.step,
        )
        state.zero_velocities()
        return state


def init_model_state(
    config: TrainConfig,
    n_channels: int,
    fs: float,
    channel_names: Optional[list[str]] = None,
    rng: Optional[np.random.Generator] = None
) -> ModelState:
    """
    Fresh model for a configuration.

    Head weights start at zero (predictions 0.5) unless
    ``config.head_init_scale`` asks for a seeded uniform draw.
    """
    kind = FeatureKind(config.feature_kind)
    if config.n_channels is not None and config.n_channels != n_channels:
        raise ValidationError(
            f"Config expects {config.n_channels} channels but the data has {n_channels}"
        )
    bank = init_bank(n_channels, config.n_maps, layout_for(kind), kind)
    D = feature_dim(kind, n_channels, config.n_maps)

    head = ClassifierParams.zeros(D)
    if config.head_init_scale > 0:
        rng = rng if rng is not None else np.random.default_rng(config.seed)
        head.weights = rng.uniform(-config.head_init_scale, config.head_init_scale, size=D)

    state = ModelState(
        feature_kind=kind,
        bank=bank,
        bn=BatchNormState.create(D, config.bn_momentum, config.bn_eps),
        head=head,
        fs=fs,
        channel_names=channel_names or [f"ch{c:02d}" for c in range(n_channels)],
    )
    state.zero_velocities()
    logger.debug(
        f"Initialized {kind.value} model: C={n_channels}, K={config.n_maps}, "
        f"D={D}, {count_parameters(kind, n_channels, config.n_maps)} parameters"
    )
    return state


def save_checkpoint(state: ModelState, config: TrainConfig, path: Path) -> Path:
    """Write a JSON checkpoint."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        f.write(state.to_record(config).model_dump_json(indent=2))
    logger.info(f"Saved checkpoint to {path}")
    return path


def load_checkpoint(path: Path) -> tuple[ModelState, TrainConfig]:
    """
    Rebuild a model from a JSON checkpoint.

    Returns:
        Eval-mode ModelState and the configuration it was trained with

    Raises:
        NotFoundError: If the file does not exist
    """
    path = Path(path)
    if not path.exists():
        raise NotFoundError(f"Checkpoint not found: {path}")
    with open(path, "r") as f:
        record = CheckpointRecord.model_validate(json.load(f))
    return ModelState.from_record(record), record.config
