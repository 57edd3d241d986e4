"""Tests for batch normalization, the logistic classifier and its loss."""

import numpy as np
import pytest

from common.errors import ShapeMismatchError, ValidationError
from model.head import (
    BatchNormState,
    ClassifierParams,
    HeadCache,
    Mode,
    batchnorm_forward,
    head_backward,
    head_forward,
    loss,
    predict,
)


# =============================================================================
# Batch normalization
# =============================================================================


class TestBatchNorm:
    def test_constant_column_maps_to_zero(self):
        features = np.array([[2.0, -1.0], [2.0, 1.0]])
        out = batchnorm_forward(features, BatchNormState.create(2))
        np.testing.assert_allclose(out[:, 0], 0.0)
        np.testing.assert_allclose(out[:, 1], [-1.0, 1.0], atol=1e-4)

    def test_eval_uses_running_statistics(self):
        state = BatchNormState(running_mean=np.array([3.0]), running_var=np.array([4.0]), eps=1e-12).eval()
        out = batchnorm_forward(np.array([[7.0]]), state)
        assert out[0, 0] == pytest.approx(2.0)

    def test_eval_never_mutates(self, rng):
        state = BatchNormState.create(3).eval()
        before = state.copy()
        batchnorm_forward(rng.standard_normal((5, 3)), state)
        np.testing.assert_array_equal(state.running_mean, before.running_mean)
        np.testing.assert_array_equal(state.running_var, before.running_var)

    def test_train_updates_running_statistics(self):
        state = BatchNormState.create(1, momentum=0.1)
        batchnorm_forward(np.array([[1.0], [3.0]]), state)
        assert state.running_mean[0] == pytest.approx(0.2)
        assert state.running_var[0] == pytest.approx(0.9 * 1.0 + 0.1 * 1.0)

    def test_untracked_train_pass_keeps_statistics(self):
        state = BatchNormState.create(1)
        batchnorm_forward(np.array([[1.0], [3.0]]), state, track=False)
        assert state.running_mean[0] == 0.0

    def test_train_mode_output_is_standardized(self, rng):
        features = 10.0 * rng.standard_normal((32, 4)) + np.array([5.0, -3.0, 0.0, 100.0])
        out = batchnorm_forward(features, BatchNormState.create(4))
        np.testing.assert_allclose(out.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(out.var(axis=0), 1.0, rtol=1e-6)

    def test_train_mode_feature_gradient_sums_to_zero(self, rng):
        features = rng.standard_normal((8, 3))
        targets = np.array([0, 1, 1, 0, 1, 0, 0, 1])
        params = ClassifierParams(weights=rng.standard_normal(3), bias=-0.2)
        cache = head_forward(features, BatchNormState.create(3), params)
        grads = head_backward(cache, targets, params, gamma=0.01)
        np.testing.assert_allclose(grads.features.sum(axis=0), 0.0, atol=1e-12)

    def test_train_needs_two_rows(self):
        with pytest.raises(ValidationError):
            batchnorm_forward(np.array([[1.0, 2.0]]), BatchNormState.create(2))

    def test_dimension_checked(self):
        with pytest.raises(ShapeMismatchError):
            batchnorm_forward(np.zeros((4, 3)), BatchNormState.create(2))


# =============================================================================
# Classifier and loss
# =============================================================================


class TestPredict:
    def test_zero_parameters(self):
        np.testing.assert_allclose(predict(np.ones((3, 2)), ClassifierParams.zeros(2)), 0.5)

    def test_log_three(self):
        params = ClassifierParams(weights=np.array([1.0]), bias=0.0)
        assert predict(np.array([[np.log(3.0)]]), params)[0] == pytest.approx(0.75)

    def test_monotone_in_positive_weight(self):
        params = ClassifierParams(weights=np.array([0.5, -1.0]), bias=0.1)
        low = predict(np.array([[0.0, 1.0]]), params)[0]
        high = predict(np.array([[0.1, 1.0]]), params)[0]
        assert high > low


class TestLoss:
    def test_perfect_predictions(self):
        assert loss(np.array([0.0, 1.0]), np.array([0, 1]), ClassifierParams.zeros(3)) == 0.0

    def test_chance_predictions(self):
        assert loss(np.full(4, 0.5), np.array([0, 1, 0, 1]), ClassifierParams.zeros(1)) == pytest.approx(0.25)

    def test_with_l1(self):
        params = ClassifierParams(weights=np.array([1.0, -2.0]), bias=5.0)
        value = loss(np.array([0.2, 0.9]), np.array([0, 1]), params, gamma=0.1)
        assert value == pytest.approx(0.325)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            loss(np.zeros(3), np.zeros(2), ClassifierParams.zeros(1))


# =============================================================================
# Backward
# =============================================================================


def head_loss(features, targets, params, gamma):
    cache = head_forward(features, BatchNormState.create(features.shape[1]), params, track=False)
    return loss(cache.probabilities, targets, params, gamma)


class TestHeadBackward:
    def test_finite_differences(self, rng):
        B, D, gamma, step = 6, 5, 0.01, 1e-6
        features = rng.standard_normal((B, D))
        targets = np.array([0, 1, 1, 0, 1, 0])
        params = ClassifierParams(weights=rng.standard_normal(D), bias=0.3)

        cache = head_forward(features, BatchNormState.create(D), params, track=False)
        grads = head_backward(cache, targets, params, gamma)

        numeric_w = np.zeros(D)
        for i in range(D):
            plus, minus = params.copy(), params.copy()
            plus.weights[i] += step
            minus.weights[i] -= step
            numeric_w[i] = (head_loss(features, targets, plus, gamma) - head_loss(features, targets, minus, gamma)) / (2 * step)
        np.testing.assert_allclose(grads.weights, numeric_w, rtol=1e-5, atol=1e-10)

        plus, minus = params.copy(), params.copy()
        plus.bias += step
        minus.bias -= step
        numeric_b = (head_loss(features, targets, plus, gamma) - head_loss(features, targets, minus, gamma)) / (2 * step)
        assert grads.bias == pytest.approx(numeric_b, rel=1e-5, abs=1e-10)

        numeric_f = np.zeros((B, D))
        for b in range(B):
            for d in range(D):
                shifted = features.copy()
                shifted[b, d] += step
                up = head_loss(shifted, targets, params, gamma)
                shifted[b, d] -= 2 * step
                down = head_loss(shifted, targets, params, gamma)
                numeric_f[b, d] = (up - down) / (2 * step)
        np.testing.assert_allclose(grads.features, numeric_f, rtol=1e-5, atol=1e-10)

    def test_zero_weights_have_zero_l1_subgradient(self, rng):
        features = rng.standard_normal((4, 3))
        targets = np.array([0, 1, 0, 1])
        params = ClassifierParams.zeros(3)
        cache = head_forward(features, BatchNormState.create(3), params, track=False)
        plain = head_backward(cache, targets, params, gamma=0.0)
        penalized = head_backward(cache, targets, params, gamma=0.5)
        np.testing.assert_array_equal(plain.weights, penalized.weights)

    def test_minimum_has_zero_gradient(self, rng):
        targets = np.array([0, 1, 1, 0])
        cache = HeadCache(
            normalized=rng.standard_normal((4, 2)),
            inv_std=np.ones(2),
            probabilities=targets.astype(float),
            mode=Mode.TRAIN,
        )
        grads = head_backward(cache, targets, ClassifierParams(weights=np.array([0.3, -0.2])), gamma=0.0)
        np.testing.assert_array_equal(grads.weights, 0.0)
        assert grads.bias == 0.0
