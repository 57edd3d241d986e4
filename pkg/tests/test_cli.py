"""End-to-end tests of the command line."""

import csv
import json

import numpy as np
import pytest

from cli.main import build_parser, main
from evaluation.metrics import evaluate
from model.state import init_model_state, save_checkpoint
from schemas.filters import FeatureKind
from schemas.training import TrainConfig
from services.dataset_io import load_dataset
from training.trainer import train


def write_json(path, data):
    path.write_text(json.dumps(data))
    return path


@pytest.fixture
def workspace(tmp_path):
    """Small spec and training config files plus a generated dataset."""
    spec = write_json(tmp_path / "spec.json", {
        "n_subjects": 4,
        "trials_per_subject": 2,
        "n_channels": 3,
        "fs": 64.0,
        "duration_s": 4.0,
        "seed": 5,
        "effects": [{"kind": "magnitude_boost", "band_hz": [8.0, 13.0], "channel": 1, "gain": 3.0}],
    })
    config = write_json(tmp_path / "train.json", {
        "name": "tiny",
        "feature_kind": "magnitude",
        "n_maps": 1,
        "epochs": 2,
        "batch_size": 4,
        "lr0": 0.01,
        "window_s": 2.0,
        "head_init_scale": 0.01,
    })
    dataset = tmp_path / "ds"
    assert main(["synth", "--spec", str(spec), "--out", str(dataset)]) == 0
    return {"root": tmp_path, "spec": spec, "config": config, "dataset": dataset, "runs": tmp_path / "runs"}


def run_args(workspace, command, *extra):
    return [
        command,
        "--config", str(workspace["config"]),
        "--dataset", str(workspace["dataset"]),
        "--out", str(workspace["runs"]),
        *extra,
    ]


def test_parser_requires_a_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


class TestSynth:
    def test_default_spec(self, tmp_path):
        assert main(["synth", "--out", str(tmp_path)]) == 0
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert len(manifest["trials"]) == 160
        assert len(manifest["channel_names"]) == 8
        assert (tmp_path / "ground_truth.json").exists()

    def test_same_seed_same_files(self, workspace):
        again = workspace["root"] / "again"
        assert main(["synth", "--spec", str(workspace["spec"]), "--out", str(again)]) == 0
        first, second = workspace["dataset"], again
        assert (first / "manifest.json").read_bytes() == (second / "manifest.json").read_bytes()
        assert (first / "trials/s000_t00.f32").read_bytes() == (second / "trials/s000_t00.f32").read_bytes()

    def test_seed_flag_overrides_spec(self, workspace):
        other = workspace["root"] / "other"
        assert main(["synth", "--spec", str(workspace["spec"]), "--seed", "6", "--out", str(other)]) == 0
        truth = json.loads((other / "ground_truth.json").read_text())
        assert truth["spec"]["seed"] == 6
        assert (other / "trials/s000_t00.f32").read_bytes() != (workspace["dataset"] / "trials/s000_t00.f32").read_bytes()

    def test_invalid_band_names_the_field(self, tmp_path, capsys):
        spec = write_json(tmp_path / "bad.json", {
            "effects": [{"kind": "magnitude_boost", "band_hz": [13.0, 8.0], "channel": 0, "gain": 2.0}],
        })
        assert main(["synth", "--spec", str(spec), "--out", str(tmp_path / "ds")]) == 1
        assert "band_hz" in capsys.readouterr().err
        assert not (tmp_path / "ds" / "manifest.json").exists()

    def test_missing_spec_file(self, tmp_path):
        assert main(["synth", "--spec", str(tmp_path / "none.json"), "--out", str(tmp_path)]) == 1

    def test_malformed_json(self, tmp_path):
        spec = tmp_path / "broken.json"
        spec.write_text("{not json")
        assert main(["synth", "--spec", str(spec), "--out", str(tmp_path)]) == 1


class TestTrainEvalExport:
    def test_train_then_eval_then_export(self, workspace):
        runs = workspace["runs"]
        assert main(run_args(workspace, "train")) == 0
        assert (runs / "tiny/checkpoints/model.json").exists()
        assert (runs / "tiny/logs/run.log").exists()
        with open(runs / "tiny/reports/train_history.csv") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["epoch", "mean_loss", "train_uar", "lr"]
        assert len(rows) == 3

        assert main(run_args(workspace, "eval")) == 0
        report = json.loads((runs / "tiny/reports/eval_eval.json").read_text())
        assert report["n_trials"] == 8
        assert 0.0 <= report["uar"] <= 1.0

        assert main(run_args(workspace, "export", "--top-k", "2")) == 0
        exports = runs / "tiny/exports"
        bundle = json.loads((exports / "model_interpretation.json").read_text())
        assert len(bundle["bank"]["filters"]) == 3
        assert len(bundle["top_features"]) <= 2
        for name in ("model_filter_curves.csv", "model_weighted_filter_curves.csv", "magnitude_profile.csv"):
            assert (exports / name).exists(), name

    def test_eval_of_checkpoint_matches_in_process_training(self, workspace):
        runs = workspace["runs"]
        assert main(run_args(workspace, "train")) == 0
        assert main(run_args(workspace, "eval")) == 0
        report = json.loads((runs / "tiny/reports/eval_eval.json").read_text())

        dataset = load_dataset(workspace["dataset"])
        data = json.loads(workspace["config"].read_text())
        data.pop("name")
        config = TrainConfig(**data)
        result = train(config, dataset.trials, dataset.channel_names)
        expected = evaluate(result.state, dataset.trials, config.window_s)

        assert report["uar"] == pytest.approx(expected.uar)
        assert [p["trial_id"] for p in report["predictions"]] == [p.trial_id for p in expected.predictions]
        assert [p["probability"] for p in report["predictions"]] == pytest.approx(
            [p.probability for p in expected.predictions], rel=1e-9
        )

    def test_training_is_reproducible(self, workspace):
        assert main(run_args(workspace, "train", "--name", "a")) == 0
        assert main(run_args(workspace, "train", "--name", "b")) == 0
        runs = workspace["runs"]
        assert (runs / "a/checkpoints/model.json").read_bytes() == (runs / "b/checkpoints/model.json").read_bytes()

    def test_export_of_zero_weight_model(self, workspace):
        config = TrainConfig(feature_kind=FeatureKind.MAGNITUDE, n_maps=1)
        checkpoint = save_checkpoint(
            init_model_state(config, 3, 64.0), config, workspace["root"] / "zero.json"
        )
        assert main(run_args(workspace, "export", "--checkpoint", str(checkpoint))) == 0
        bundle = json.loads((workspace["runs"] / "tiny/exports/model_interpretation.json").read_text())
        assert bundle["top_features"] == []
        assert bundle["warnings"]

    def test_missing_checkpoint(self, workspace):
        assert main(run_args(workspace, "eval", "--name", "never-trained")) == 1

    def test_channel_mismatch(self, workspace):
        config = TrainConfig(feature_kind=FeatureKind.MAGNITUDE, n_maps=1)
        checkpoint = save_checkpoint(
            init_model_state(config, 5, 64.0), config, workspace["root"] / "wide.json"
        )
        assert main(run_args(workspace, "eval", "--checkpoint", str(checkpoint))) == 1

    def test_missing_dataset(self, workspace):
        args = ["train", "--config", str(workspace["config"]), "--out", str(workspace["runs"])]
        assert main(args) == 1

    def test_unknown_config_key(self, workspace, capsys):
        config = write_json(workspace["root"] / "typo.json", {"epochz": 3})
        args = ["train", "--config", str(config), "--dataset", str(workspace["dataset"]), "--out", str(workspace["runs"])]
        assert main(args) == 1
        assert "epochz" in capsys.readouterr().err


class TestCrossValidation:
    def test_cv_with_fold_flag(self, workspace):
        assert main(run_args(workspace, "cv", "--folds", "2", "--name", "cv")) == 0
        summary = json.loads((workspace["runs"] / "cv/reports/summary.json").read_text())
        assert summary["n_folds"] == 2
        assert len(summary["fold_uars"]) == 2
        assert np.isclose(summary["mean_uar"], np.mean(summary["fold_uars"]))

    def test_too_many_folds(self, workspace, capsys):
        assert main(run_args(workspace, "cv", "--folds", "5", "--name", "cv")) == 1
        assert "--folds 4" in capsys.readouterr().err
