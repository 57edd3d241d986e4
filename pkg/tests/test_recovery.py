"""
Planted-effect recovery on the bundled synthetic datasets.

The cross-validation experiments take minutes each and only run with
``pytest --runslow``.
"""

import json

import numpy as np
import pytest
from scipy import fft as sp_fft

from cli.main import CONFIGS_DIR
from dsp.features import plv_direct_oracle
from dsp.spectral import analytic_array
from evaluation.cross_validation import cross_validate
from evaluation.statistics import magnitude_profile_relative_change, two_sample_ttest
from schemas.dataset import SynthSpec
from schemas.training import RunConfig
from services.run_storage import RunStorage
from services.synthetic import band_component, generate_synthetic

ALPHA = (8.0, 13.0)
ALPHA_CENTER = 10.5


def bundled_spec(name: str) -> SynthSpec:
    return SynthSpec.model_validate(json.loads((CONFIGS_DIR / f"{name}.json").read_text()))


def bundled_config(name: str, **overrides) -> RunConfig:
    data = json.loads((CONFIGS_DIR / f"{name}.json").read_text())
    data.update(overrides)
    return RunConfig.model_validate(data)


def dataset_of(name: str):
    dataset, _ = generate_synthetic(bundled_spec(name))
    return dataset


def split_by_class(values, dataset):
    labels = np.array([trial.label for trial in dataset.trials])
    values = np.asarray(values)
    return values[labels == 1], values[labels == 0]


# =============================================================================
# Direct extractors on the generated data
# =============================================================================


def test_magnitude_effect_is_measurable():
    dataset = dataset_of("synth_magnitude")
    values = [band_component(trial.data[3], trial.fs, ALPHA).std() for trial in dataset.trials]
    t, p = two_sample_ttest(*split_by_class(values, dataset))
    assert t > 0 and p < 0.01


def test_correlation_effect_is_measurable():
    dataset = dataset_of("synth_correlation")
    values = [
        abs(np.corrcoef(band_component(trial.data[[1, 5]], trial.fs, ALPHA))[0, 1])
        for trial in dataset.trials
    ]
    t, p = two_sample_ttest(*split_by_class(values, dataset))
    assert t > 0 and p < 0.01


def test_phase_lock_effect_is_measurable():
    dataset = dataset_of("synth_phase_lock")

    def plv(trial):
        n = trial.n_samples
        a, b = analytic_array(sp_fft.rfft(band_component(trial.data[[2, 6]], trial.fs, ALPHA), axis=-1), n)
        return plv_direct_oracle(a, b)

    t, p = two_sample_ttest(*split_by_class([plv(trial) for trial in dataset.trials], dataset))
    assert t > 0 and p < 0.01


def test_magnitude_profile_peaks_in_planted_band():
    profile = magnitude_profile_relative_change(dataset_of("synth_magnitude"))
    channel, bin_index = np.unravel_index(np.nanargmax(np.abs(profile.relative_change)), profile.relative_change.shape)
    assert channel == 3
    assert ALPHA[0] <= profile.freqs[bin_index] <= ALPHA[1]


# =============================================================================
# Cross-validated recovery
# =============================================================================


@pytest.mark.slow
def test_magnitude_recovery():
    result = cross_validate(bundled_config("cv_magnitude"), dataset_of("synth_magnitude"))
    assert result.summary.mean_uar >= 0.90
    for fold in result.folds:
        top = fold.top_features[0]
        assert top.channels == ["ch03"], fold.fold_index
        assert abs(top.filters[0].mu_hz - ALPHA_CENTER) <= 2.0, fold.fold_index


@pytest.mark.slow
def test_correlation_recovery():
    result = cross_validate(bundled_config("cv_correlation"), dataset_of("synth_correlation"))
    assert result.summary.mean_uar >= 0.85
    hits = sum(fold.top_features[0].channels == ["ch01", "ch05"] for fold in result.folds if fold.top_features)
    assert hits >= 8


@pytest.mark.slow
def test_null_dataset_stays_at_chance():
    result = cross_validate(bundled_config("cv_magnitude"), dataset_of("synth_null"))
    assert 0.40 <= result.summary.mean_uar <= 0.60


@pytest.mark.slow
def test_l1_penalty_sparsifies_weights():
    dataset = dataset_of("synth_magnitude")

    def run(gamma):
        result = cross_validate(bundled_config("cv_magnitude", gamma=gamma), dataset)
        active = sum(
            sum(abs(w.weight) > 1e-3 for w in bundle.weights)
            for bundle in result.bundles
        )
        return result.summary.mean_uar, active

    plain_uar, plain_active = run(0.0)
    sparse_uar, sparse_active = run(2e-3)
    assert sparse_active <= 0.75 * plain_active
    assert plain_uar - sparse_uar <= 0.05


@pytest.mark.slow
def test_repeated_runs_write_identical_summaries(tmp_path):
    dataset = dataset_of("synth_magnitude")
    config = bundled_config("cv_magnitude")
    paths = []
    for name in ("first", "second"):
        storage = RunStorage(tmp_path / name)
        cross_validate(config, dataset, storage)
        paths.append(storage.reports_dir / "summary.json")
    assert paths[0].read_bytes() == paths[1].read_bytes()
