"""Shared fixtures for the Spectral Miner test suite."""

import numpy as np
import pytest

from dsp.spectral import standardize_trial
from schemas.dataset import MagnitudeBoost, SynthSpec
from schemas.filters import FeatureKind
from schemas.training import TrainConfig
from schemas.trial import TrialTensor
from services.synthetic import generate_synthetic


def pytest_addoption(parser):
    parser.addoption(
        "--runslow",
        action="store_true",
        default=False,
        help="run the slow synthetic-recovery experiments",
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


# =============================================================================
# Helpers
# =============================================================================


def make_trial(
    data: np.ndarray,
    fs: float = 64.0,
    label: int = 0,
    subject_id: str = "s000",
    trial_id: str = "t",
) -> TrialTensor:
    """Wrap a raw matrix without standardizing it."""
    return TrialTensor(data=data, fs=fs, label=label, subject_id=subject_id, trial_id=trial_id)


def random_trials(
    rng: np.random.Generator,
    n_trials: int,
    n_channels: int = 3,
    n_samples: int = 128,
    fs: float = 64.0,
) -> list[TrialTensor]:
    """Standardized white-noise trials with alternating labels, two per subject."""
    return [
        standardize_trial(
            rng.standard_normal((n_channels, n_samples)),
            fs,
            i % 2,
            f"s{i // 2:03d}",
            f"s{i // 2:03d}_t{i % 2:02d}",
        )
        for i in range(n_trials)
    ]


# =============================================================================
# Fixtures
# =============================================================================


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def small_spec() -> SynthSpec:
    """Six subjects, four channels, a strong alpha boost on channel 1."""
    return SynthSpec(
        n_subjects=6,
        trials_per_subject=4,
        n_channels=4,
        fs=128.0,
        duration_s=4.0,
        noise_level=0.05,
        effects=[MagnitudeBoost(band_hz=(8.0, 13.0), channel=1, gain=4.0)],
        seed=7,
    )


@pytest.fixture
def small_dataset(small_spec):
    dataset, _ = generate_synthetic(small_spec)
    return dataset


@pytest.fixture
def tiny_config() -> TrainConfig:
    return TrainConfig(
        feature_kind=FeatureKind.MAGNITUDE,
        n_maps=1,
        epochs=3,
        batch_size=8,
        lr0=0.01,
        window_s=2.0,
        head_init_scale=0.01,
        seed=0,
    )
