"""Tests for subject partitioning and the cross-validation workflow."""

import json
import logging

import pytest

from common.errors import ValidationError
from evaluation.cross_validation import CrossValidationRunner, cross_validate, partition_subjects
from schemas.training import RunConfig
from services.run_storage import RunStorage

SUBJECTS = [f"s{i:03d}" for i in range(20)]


class TestPartitionSubjects:
    def test_equal_folds_cover_every_subject_once(self):
        folds = partition_subjects(SUBJECTS, 10, seed=0)
        assert [len(fold) for fold in folds] == [2] * 10
        flat = [s for fold in folds for s in fold]
        assert sorted(flat) == SUBJECTS

    def test_remainder_goes_to_first_folds(self):
        folds = partition_subjects(SUBJECTS[:7], 3, seed=0)
        assert [len(fold) for fold in folds] == [3, 2, 2]

    def test_seeded(self):
        assert partition_subjects(SUBJECTS, 4, seed=3) == partition_subjects(SUBJECTS, 4, seed=3)
        assert partition_subjects(SUBJECTS, 4, seed=3) != partition_subjects(SUBJECTS, 4, seed=4)

    def test_input_order_does_not_matter(self):
        assert partition_subjects(SUBJECTS, 5, seed=1) == partition_subjects(SUBJECTS[::-1], 5, seed=1)

    def test_too_few_subjects(self):
        with pytest.raises(ValidationError, match="--folds 3"):
            partition_subjects(SUBJECTS[:3], 4, seed=0)

    def test_at_least_two_folds(self):
        with pytest.raises(ValidationError):
            partition_subjects(SUBJECTS, 1, seed=0)


@pytest.fixture
def cv_config(tiny_config) -> RunConfig:
    return RunConfig(**tiny_config.model_dump(), name="cv-test", folds=3, top_k=5)


def test_cross_validation_run(small_dataset, cv_config, tmp_path):
    storage = RunStorage(tmp_path / "cv-test")
    result = cross_validate(cv_config, small_dataset, storage)

    assert [fold.fold_index for fold in result.folds] == [0, 1, 2]
    held_out = [s for fold in result.folds for s in fold.val_subjects]
    assert sorted(held_out) == small_dataset.subjects
    for fold in result.folds:
        assert not set(fold.train_subjects) & set(fold.val_subjects)
        assert len(fold.train_subjects) == 4
        assert 0.0 <= fold.val_uar <= 1.0
        assert len(fold.history) == cv_config.epochs
        assert len(fold.filters) == 4

    summary = result.summary
    assert summary.n_folds == 3
    assert summary.fold_uars == [fold.val_uar for fold in result.folds]
    assert summary.mean_uar == pytest.approx(sum(summary.fold_uars) / 3)
    assert summary.best_fold == max(range(3), key=lambda i: (summary.fold_uars[i], -i))
    assert len(result.filter_slots) == 4

    root = storage.root
    for relative in (
        "reports/summary.json",
        "reports/histories.csv",
        "reports/fold_00.json",
        "reports/fold_02_eval.json",
        "checkpoints/fold_01.json",
        "exports/fold_00_interpretation.json",
        "exports/fold_00_feature_index_map.json",
        "exports/filter_slots.json",
    ):
        assert (root / relative).exists(), relative
    with open(root / "reports/fold_00.json") as f:
        assert json.load(f)["checkpoint_path"] == "checkpoints/fold_00.json"


def test_cross_validation_is_deterministic(small_dataset, cv_config):
    first = cross_validate(cv_config, small_dataset)
    second = cross_validate(cv_config, small_dataset)
    assert first.summary == second.summary
    assert [f.filters for f in first.folds] == [f.filters for f in second.folds]


def test_progress_callback_reaches_completion(small_dataset, cv_config):
    updates = []
    runner = CrossValidationRunner(cv_config, small_dataset, progress_callback=updates.append)
    runner.run()
    assert runner.status == "completed"
    assert updates[-1]["progress_percent"] == 100


def test_messages_go_to_the_module_logger(small_dataset, cv_config, caplog, monkeypatch):
    monkeypatch.setattr(logging.getLogger("spectral_miner"), "propagate", True)
    runner = CrossValidationRunner(cv_config, small_dataset)
    with caplog.at_level("INFO", logger="spectral_miner.evaluation.cross_validation"):
        runner.run()
    assert not hasattr(runner, "logs")
    assert any(r.name == "spectral_miner.evaluation.cross_validation" for r in caplog.records)


def test_failed_run_is_marked(small_dataset, cv_config):
    runner = CrossValidationRunner(cv_config.model_copy(update={"folds": 7}), small_dataset)
    with pytest.raises(ValidationError):
        runner.run()
    assert runner.status == "failed"


@pytest.mark.slow
def test_worker_pool_size_does_not_change_results(small_dataset, cv_config):
    sequential = cross_validate(cv_config, small_dataset)
    parallel = cross_validate(cv_config.model_copy(update={"jobs": 2}), small_dataset)
    assert sequential.summary == parallel.summary
