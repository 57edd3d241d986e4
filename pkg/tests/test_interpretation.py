"""Tests for the interpretation exports."""

import numpy as np
import pytest

from common.errors import ValidationError
from dsp.features import feature_index_map
from evaluation.interpretation import (
    aggregate_fold_filters,
    best_fold,
    connectivity_edges,
    curve_grid,
    export_interpretation,
    filter_curves,
    top_features,
    weighted_filter_curves,
)
from model.state import ModelState, init_model_state
from schemas.filters import FeatureKind
from schemas.reports import FeatureWeight, FoldReport, InterpretationBundle
from schemas.training import TrainConfig
from tests.conftest import random_trials


def make_model(kind: FeatureKind, C: int = 3, K: int = 1, fs: float = 64.0) -> ModelState:
    return init_model_state(TrainConfig(feature_kind=kind, n_maps=K), C, fs)


def index_map_of(model: ModelState):
    return feature_index_map(model.feature_kind, model.n_channels, model.bank.n_maps, model.channel_names)


def bundle_of(model: ModelState) -> InterpretationBundle:
    entries = index_map_of(model)
    return InterpretationBundle(
        feature_kind=model.feature_kind,
        bank=model.bank.to_record(model.channel_names),
        feature_index_map=entries,
        weights=[
            FeatureWeight(index=e.index, name=e.name, weight=float(model.head.weights[e.index]))
            for e in entries
        ],
    )


class TestTopFeatures:
    def test_zero_weights_excluded(self):
        model = make_model(FeatureKind.MAGNITUDE)
        model.head.weights[:] = [0.0, -2.0, 1.0]
        top = top_features(model, index_map_of(model), k=10)
        assert [(f.rank, f.index, f.weight) for f in top] == [(1, 1, -2.0), (2, 2, 1.0)]
        assert top[0].channels == ["ch01"]
        assert top[0].filters[0].channel == "ch01"

    def test_k_limits_the_list(self):
        model = make_model(FeatureKind.MAGNITUDE)
        model.head.weights[:] = [0.1, 0.3, 0.2]
        assert [f.index for f in top_features(model, index_map_of(model), k=2)] == [1, 2]

    def test_same_band_in_another_map_is_deduplicated(self):
        model = make_model(FeatureKind.MAGNITUDE, K=2)
        model.head.weights[:] = [3.0, 0.0, 0.0, 2.0, 0.0, 0.0]
        entries = index_map_of(model)
        assert [f.index for f in top_features(model, entries)] == [0]
        assert [f.index for f in top_features(model, entries, dedupe=False)] == [0, 3]

    def test_distinct_bands_are_kept(self):
        model = make_model(FeatureKind.MAGNITUDE, K=2)
        model.bank.mu[1, 0] = 10.0
        model.head.weights[:] = [3.0, 0.0, 0.0, 2.0, 0.0, 0.0]
        top = top_features(model, index_map_of(model))
        assert [(f.rank, f.index) for f in top] == [(1, 0), (2, 3)]

    def test_plv_features_carry_the_shared_filter(self):
        model = make_model(FeatureKind.PLV)
        model.head.weights[:] = [0.0, 1.0, 0.0]
        (feature,) = top_features(model, index_map_of(model))
        assert feature.channels == ["ch00", "ch02"]
        assert len(feature.filters) == 1 and feature.filters[0].channel is None


class TestConnectivityEdges:
    def test_sorted_with_cross_frequency_flags(self):
        model = make_model(FeatureKind.CORRELATION)
        model.bank.mu[0, 0] = 10.0
        model.head.weights[:] = [0.5, -1.0, 0.1]
        edges = connectivity_edges(model)
        assert [(e.channel_a, e.channel_b) for e in edges] == [("ch00", "ch02"), ("ch00", "ch01"), ("ch01", "ch02")]
        assert [e.cross_frequency for e in edges] == [True, True, False]
        assert edges[0].center_a_hz == 10.0 and edges[0].center_b_hz == 23.0

    def test_zero_weight_edges_dropped(self):
        model = make_model(FeatureKind.PLV)
        model.head.weights[:] = [0.0, 0.4, 0.0]
        assert len(connectivity_edges(model)) == 1

    def test_magnitude_models_have_no_edges(self):
        with pytest.raises(ValidationError):
            connectivity_edges(make_model(FeatureKind.MAGNITUDE))


class TestCurves:
    def test_filter_curves_peak_at_center(self):
        model = make_model(FeatureKind.MAGNITUDE)
        grid = curve_grid(64.0)
        curves = filter_curves(model.bank, grid)
        assert curves.shape == (1, 3, grid.size)
        assert grid[np.argmax(curves[0, 0])] == pytest.approx(23.0)
        assert curves.max() == pytest.approx(1.0)

    def test_weighted_curves_carry_sign(self):
        model = make_model(FeatureKind.MAGNITUDE)
        model.head.weights[:] = [2.0, -1.0, 0.0]
        curves = weighted_filter_curves(model, np.array([23.0]))
        np.testing.assert_allclose(curves[0, :, 0], [2.0, -1.0, 0.0])

    def test_weighted_curves_need_magnitude_model(self):
        with pytest.raises(ValidationError):
            weighted_filter_curves(make_model(FeatureKind.CORRELATION), curve_grid(64.0))

    def test_grid_spans_nyquist(self):
        grid = curve_grid(128.0)
        assert grid[0] == 0.0 and grid[-1] == pytest.approx(64.0)


class TestExportInterpretation:
    def test_all_zero_weights_warn(self, rng):
        model = make_model(FeatureKind.MAGNITUDE)
        bundle = export_interpretation(model, random_trials(rng, 8))
        assert bundle.top_features == []
        assert bundle.ttests == []
        assert bundle.warnings
        assert len(bundle.bank.filters) == 3
        assert len(bundle.weights) == 3
        assert [d.index for d in bundle.distributions] == [0, 1, 2]

    def test_connectivity_bundle(self, rng):
        model = make_model(FeatureKind.CORRELATION, K=2)
        model.bank.mu[1, :] = 10.0
        model.head.weights[:] = [0.5, 0.0, -0.2, 0.0, 0.9, 0.0]
        bundle = export_interpretation(model, random_trials(rng, 10), top_k=2)

        assert len(bundle.bank.filters) == 6
        assert [f.index for f in bundle.top_features] == [4, 0]
        assert [t.index for t in bundle.ttests] == [4, 0]
        assert all(t.n_class_0 == 5 and t.n_class_1 == 5 for t in bundle.ttests)
        assert all(0.0 <= t.p_value <= 1.0 for t in bundle.ttests)
        assert [d.index for d in bundle.distributions] == list(range(6))
        assert all(len(d.class_0) == 5 and len(d.class_1) == 5 for d in bundle.distributions)
        assert len(bundle.edges) == 3


class TestAcrossFolds:
    def test_filters_averaged_by_center_rank(self):
        first = make_model(FeatureKind.MAGNITUDE, C=1, K=2)
        first.bank.mu[:, 0] = [30.0, 10.0]
        first.head.weights[:] = [1.0, -0.5]
        second = make_model(FeatureKind.MAGNITUDE, C=1, K=2)
        second.bank.mu[:, 0] = [12.0, 28.0]
        second.head.weights[:] = [0.25, 2.0]

        slots = {s.slot: s for s in aggregate_fold_filters([bundle_of(first), bundle_of(second)])}

        assert slots[0].mean_mu_hz == pytest.approx(11.0)
        assert slots[1].mean_mu_hz == pytest.approx(29.0)
        assert slots[0].mean_abs_weight == pytest.approx(0.375)
        assert slots[1].max_abs_weight == pytest.approx(2.0)
        assert all(s.n_folds == 2 and s.channel == "ch00" for s in slots.values())

    def test_layouts_must_agree(self):
        with pytest.raises(ValidationError):
            aggregate_fold_filters([
                bundle_of(make_model(FeatureKind.MAGNITUDE, K=1)),
                bundle_of(make_model(FeatureKind.MAGNITUDE, K=2)),
            ])

    def test_best_fold_prefers_lowest_index_on_ties(self):
        reports = [
            FoldReport(fold_index=i, train_subjects=["a"], val_subjects=["b"], val_uar=uar)
            for i, uar in enumerate([0.6, 0.8, 0.8])
        ]
        assert best_fold(reports).fold_index == 1
