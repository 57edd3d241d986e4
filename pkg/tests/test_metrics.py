"""Tests for UAR, the decision rule and window-averaged evaluation."""

import numpy as np
import pytest

import evaluation.metrics as metrics
from common.errors import ValidationError
from evaluation.metrics import classify, evaluate, uar
from model.state import init_model_state
from schemas.filters import FeatureKind
from schemas.training import TrainConfig
from tests.conftest import make_trial, random_trials


class TestUar:
    def test_perfect(self):
        assert uar([0, 1, 1, 0], [0, 1, 1, 0]) == 1.0

    def test_all_wrong(self):
        assert uar([1, 0], [0, 1]) == 0.0

    def test_constant_prediction_is_chance(self):
        assert uar([1] * 10, [0] * 9 + [1]) == pytest.approx(0.5)

    def test_unequal_recalls(self):
        assert uar([0, 1, 1, 1, 1, 0], [0, 0, 1, 1, 1, 1]) == pytest.approx(0.625)

    def test_missing_class(self):
        with pytest.raises(ValidationError):
            uar([0, 1], [1, 1])

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            uar([0, 1, 1], [0, 1])


@pytest.mark.parametrize("probability, expected", [(0.5, 0), (0.5000001, 1), (0.0, 0), (1.0, 1)])
def test_classify_threshold(probability, expected):
    assert classify(probability) == expected


@pytest.fixture
def plain_model():
    config = TrainConfig(feature_kind=FeatureKind.MAGNITUDE, n_maps=1)
    return init_model_state(config, 3, 64.0)


def queued_probabilities(monkeypatch, *rows):
    """Make predict_proba hand out one row per evaluated trial."""
    queue = [np.asarray(row) for row in rows]
    calls = []

    def fake_predict_proba(model, data, fs=None):
        calls.append(data.shape)
        return queue.pop(0)

    monkeypatch.setattr(metrics, "predict_proba", fake_predict_proba)
    return calls


class TestEvaluate:
    def test_window_probabilities_are_averaged(self, monkeypatch, plain_model, rng):
        trials = [
            make_trial(rng.standard_normal((3, 192)), label=1, trial_id="a"),
            make_trial(rng.standard_normal((3, 192)), label=0, trial_id="b"),
        ]
        calls = queued_probabilities(monkeypatch, [0.9, 0.8, 0.1], [0.2, 0.3, 0.1])

        report = evaluate(plain_model, trials, window_s=1.0)

        assert calls == [(3, 3, 64), (3, 3, 64)]
        first, second = report.predictions
        assert first.probability == pytest.approx(0.6)
        assert first.predicted == 1 and first.n_windows == 3
        assert second.predicted == 0
        assert report.uar == 1.0

    def test_exact_half_goes_to_class_zero(self, monkeypatch, plain_model, rng):
        trials = [
            make_trial(rng.standard_normal((3, 128)), label=1),
            make_trial(rng.standard_normal((3, 128)), label=0),
        ]
        queued_probabilities(monkeypatch, [0.5, 0.5], [0.5, 0.5])

        report = evaluate(plain_model, trials, window_s=1.0)

        assert [p.predicted for p in report.predictions] == [0, 0]
        assert report.uar == 0.5

    def test_untrained_model_is_at_chance(self, plain_model, rng):
        report = evaluate(plain_model, random_trials(rng, 6))
        assert all(p.probability == pytest.approx(0.5) for p in report.predictions)
        assert report.uar == 0.5
        assert report.n_trials == 6

    def test_results_do_not_depend_on_batch_composition(self, plain_model, rng):
        plain_model.head.weights[:] = [0.3, -0.2, 0.5]
        trials = random_trials(rng, 6)
        together = evaluate(plain_model, trials)
        alone = [evaluate(plain_model, [trials[i], trials[i + 1]]) for i in (0, 2, 4)]
        separate = [p.probability for report in alone for p in report.predictions]
        np.testing.assert_allclose([p.probability for p in together.predictions], separate)

    def test_degenerate_trial_skipped(self, plain_model, rng):
        trials = random_trials(rng, 4) + [make_trial(np.zeros((3, 128)), label=1, trial_id="flat")]
        report = evaluate(plain_model, trials)
        assert report.n_trials == 4
        assert "flat" not in [p.trial_id for p in report.predictions]

    def test_single_class_set_rejected(self, plain_model, rng):
        trials = [t for t in random_trials(rng, 6) if t.label == 0]
        with pytest.raises(ValidationError):
            evaluate(plain_model, trials)
