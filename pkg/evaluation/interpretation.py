"""
Interpretation

Turns a trained model into readable exports. Batch normalization has no
learnable scale, so each classifier weight is the importance (magnitude)
and direction (sign) of its feature. Exports cover the learned filters,
weights keyed by the feature index map, raw class-wise feature values,
t-tests of the top features and connectivity edges.
"""

import logging
from typing import Optional

import numpy as np

from common.errors import ValidationError
from dsp.features import feature_index_map
from dsp.filterbank import FilterBank
from dsp.spectral import restandardize
from evaluation.statistics import two_sample_ttest
from model.gradients import extract_features
from model.state import ModelState
from schemas.filters import FeatureIndexEntry, FeatureKind, FilterLayout, FilterRecord
from schemas.reports import (
    ConnectivityEdge,
    FeatureDistribution,
    FeatureWeight,
    FilterSlotSummary,
    FoldReport,
    InterpretationBundle,
    TopFeature,
    TTestResult,
)
from schemas.trial import TrialTensor
from training.sampling import WindowMode, sample_windows

logger = logging.getLogger("spectral_miner.evaluation.interpretation")

DUPLICATE_TOLERANCE_HZ = 1.0


# ============================================================================
# Filters
# ============================================================================

def filter_curves(bank: FilterBank, freq_grid: np.ndarray) -> np.ndarray:
    """|F| of every filter on a frequency grid, shape [K, C or 1, F]."""
    return bank.magnitudes(np.asarray(freq_grid, dtype=np.float64))


def weighted_filter_curves(model: ModelState, freq_grid: np.ndarray) -> np.ndarray:
    """
    Filter curves of a magnitude model scaled by the weight of their feature.

    The sign of each curve is the direction of the feature's effect.
    """
    if model.feature_kind != FeatureKind.MAGNITUDE:
        raise ValidationError("Weighted filter curves are only defined for magnitude models")
    curves = filter_curves(model.bank, freq_grid)
    weights = model.head.weights.reshape(model.bank.n_maps, model.n_channels)
    return curves * weights[..., None]


def _filter_of(bank: FilterBank, records: list[FilterRecord], map_index: int, channel: int) -> FilterRecord:
    column = channel if bank.layout == FilterLayout.PER_ELECTRODE else 0
    return records[map_index * bank.n_columns + column]


def filters_for_feature(model: ModelState, entry: FeatureIndexEntry, records: list[FilterRecord]) -> list[FilterRecord]:
    """The filter(s) that produce one feature."""
    if model.bank.layout == FilterLayout.SHARED:
        return [_filter_of(model.bank, records, entry.map_index, 0)]
    return [_filter_of(model.bank, records, entry.map_index, c) for c in entry.channel_indices]


def _same_band(a: FilterRecord, b: FilterRecord) -> bool:
    return (
        abs(a.mu_hz - b.mu_hz) < DUPLICATE_TOLERANCE_HZ
        and abs(a.h_hz - b.h_hz) < DUPLICATE_TOLERANCE_HZ
    )


# ============================================================================
# Weights and top features
# ============================================================================

def dedupe_top_features(ranked: list[TopFeature]) -> list[TopFeature]:
    """
    Drop features that repeat a higher-ranked one from another map.

    Two features are duplicates when they cover the same channel (or pair)
    and every corresponding filter agrees within 1 Hz in both center and
    bandwidth. Ranks are renumbered.
    """
    kept: list[TopFeature] = []
    for candidate in ranked:
        duplicate = any(
            other.channels == candidate.channels
            and other.map_index != candidate.map_index
            and len(other.filters) == len(candidate.filters)
            and all(_same_band(a, b) for a, b in zip(other.filters, candidate.filters))
            for other in kept
        )
        if duplicate:
            logger.debug(f"Dropping {candidate.name}: same band as a higher-ranked map")
            continue
        kept.append(candidate)
    return [feature.model_copy(update={"rank": rank}) for rank, feature in enumerate(kept, start=1)]


def top_features(
    model: ModelState,
    index_map: list[FeatureIndexEntry],
    k: int = 10,
    dedupe: bool = True
) -> list[TopFeature]:
    """Up to ``k`` nonzero-weight features ranked by |weight|."""
    records = model.bank.to_record(model.channel_names).filters
    weights = model.head.weights
    # stable sort keeps index order among equal |w|
    order = np.argsort(-np.abs(weights), kind="stable")
    ranked = []
    for index in order.tolist():
        if weights[index] == 0.0:
            break
        entry = index_map[index]
        ranked.append(TopFeature(
            rank=len(ranked) + 1,
            index=index,
            name=entry.name,
            weight=float(weights[index]),
            map_index=entry.map_index,
            channels=entry.channels,
            filters=filters_for_feature(model, entry, records),
        ))
    if dedupe:
        ranked = dedupe_top_features(ranked)
    return ranked[:k]


def connectivity_edges(model: ModelState, index_map: Optional[list[FeatureIndexEntry]] = None) -> list[ConnectivityEdge]:
    """
    Channel pairs weighted by their classifier weight, largest |weight| first.

    An edge whose two filters cover different bands is marked cross-frequency.
    """
    if model.feature_kind == FeatureKind.MAGNITUDE:
        raise ValidationError("Connectivity edges need a correlation or PLV model")
    index_map = index_map or feature_index_map(
        model.feature_kind, model.n_channels, model.bank.n_maps, model.channel_names
    )
    records = model.bank.to_record(model.channel_names).filters

    edges = []
    for entry in index_map:
        weight = float(model.head.weights[entry.index])
        if weight == 0.0:
            continue
        filter_a = _filter_of(model.bank, records, entry.map_index, entry.channel_indices[0])
        filter_b = _filter_of(model.bank, records, entry.map_index, entry.channel_indices[1])
        edges.append(ConnectivityEdge(
            channel_a=entry.channels[0],
            channel_b=entry.channels[1],
            map_index=entry.map_index,
            weight=weight,
            center_a_hz=filter_a.mu_hz,
            center_b_hz=filter_b.mu_hz,
            cross_frequency=not _same_band(filter_a, filter_b),
        ))
    return sorted(edges, key=lambda edge: -abs(edge.weight))


# ============================================================================
# Class-wise feature values
# ============================================================================

def raw_features(
    model: ModelState,
    trials: list[TrialTensor],
    window_s: Optional[float] = None
) -> tuple[np.ndarray, np.ndarray]:
    """
    Unstandardized feature vectors per trial (window features averaged).

    Returns:
        Features [n_trials x D] and labels [n_trials]; degenerate trials are skipped
    """
    values, labels = [], []
    for trial in trials:
        trial = restandardize(trial)
        if trial.degenerate:
            continue
        windows = sample_windows(trial, WindowMode.EVAL, window_s)
        result, _ = extract_features(
            np.stack([window.data for window in windows]), model.bank, model.feature_kind, trial.fs
        )
        values.append(result.values.mean(axis=0))
        labels.append(trial.label)
    if not values:
        raise ValidationError("No usable trials to compute features on")
    return np.stack(values), np.array(labels, dtype=int)


def feature_distributions(
    values: np.ndarray,
    labels: np.ndarray,
    index_map: list[FeatureIndexEntry],
    indices: list[int]
) -> list[FeatureDistribution]:
    """Per-class values and 25/50/75 percentiles of the selected features."""
    distributions = []
    for index in indices:
        column = values[:, index]
        distributions.append(FeatureDistribution(
            index=index,
            name=index_map[index].name,
            class_0=column[labels == 0].tolist(),
            class_1=column[labels == 1].tolist(),
            quartiles=np.percentile(column, [25, 50, 75]).tolist(),
        ))
    return distributions


def export_interpretation(
    model: ModelState,
    trials: list[TrialTensor],
    top_k: int = 10,
    window_s: Optional[float] = None
) -> InterpretationBundle:
    """
    Collect everything needed to interpret a trained model.

    The bundle holds the learned filters, weights keyed by the feature
    index map, raw class-wise values of every feature, t-tests and a
    ranking of the top-k features by |weight| and, for connectivity
    models, the weighted edge list.
    """
    kind = model.feature_kind
    index_map = feature_index_map(kind, model.n_channels, model.bank.n_maps, model.channel_names)
    warnings: list[str] = []

    weights = [
        FeatureWeight(index=entry.index, name=entry.name, weight=float(model.head.weights[entry.index]))
        for entry in index_map
    ]
    top = top_features(model, index_map, top_k)
    if not top:
        message = "All classifier weights are zero; no top features"
        logger.warning(message)
        warnings.append(message)

    values, labels = raw_features(model, trials, window_s)
    distributions = feature_distributions(values, labels, index_map, [entry.index for entry in index_map])

    ttests = []
    for feature in top:
        class_1 = values[labels == 1, feature.index]
        class_0 = values[labels == 0, feature.index]
        try:
            t_statistic, p_value = two_sample_ttest(class_1, class_0)
        except ValidationError as e:
            warnings.append(f"t-test skipped for {feature.name}: {e.message}")
            continue
        ttests.append(TTestResult(
            index=feature.index,
            name=feature.name,
            t_statistic=t_statistic,
            p_value=p_value,
            n_class_0=int(class_0.size),
            n_class_1=int(class_1.size),
            mean_class_0=float(class_0.mean()),
            mean_class_1=float(class_1.mean()),
        ))

    edges = connectivity_edges(model, index_map) if kind != FeatureKind.MAGNITUDE else []

    return InterpretationBundle(
        feature_kind=kind,
        bank=model.bank.to_record(model.channel_names),
        feature_index_map=index_map,
        weights=weights,
        distributions=distributions,
        ttests=ttests,
        top_features=top,
        edges=edges,
        warnings=warnings,
    )


# ============================================================================
# Across folds
# ============================================================================

def best_fold(fold_reports: list[FoldReport]) -> FoldReport:
    """Fold with the highest validation UAR (lowest index on ties)."""
    if not fold_reports:
        raise ValidationError("No fold reports to choose from")
    return max(fold_reports, key=lambda report: (report.val_uar, -report.fold_index))


def _filter_weight(bundle: InterpretationBundle, map_index: int, channel: Optional[str]) -> float:
    """Largest |weight| among the features a filter feeds."""
    magnitudes = [
        abs(bundle.weights[entry.index].weight)
        for entry in bundle.feature_index_map
        if entry.map_index == map_index and (channel is None or channel in entry.channels)
    ]
    return max(magnitudes, default=0.0)


def aggregate_fold_filters(bundles: list[InterpretationBundle]) -> list[FilterSlotSummary]:
    """
    Average filters across folds slot by slot.

    Per channel, the K filters of each fold are ordered by center frequency
    and slot s collects the s-th lowest filter of every fold, so
    low-frequency filters are averaged together.
    """
    if not bundles:
        raise ValidationError("No interpretation bundles to aggregate")
    layouts = {(bundle.bank.layout, bundle.bank.n_channels, bundle.bank.n_maps) for bundle in bundles}
    if len(layouts) != 1:
        raise ValidationError(f"Folds disagree on bank layout: {sorted(map(str, layouts))}")

    slots: dict[tuple[Optional[str], int], list[tuple[FilterRecord, float]]] = {}
    for bundle in bundles:
        by_channel: dict[Optional[str], list[FilterRecord]] = {}
        for record in bundle.bank.filters:
            by_channel.setdefault(record.channel, []).append(record)
        for channel, records in by_channel.items():
            for slot, record in enumerate(sorted(records, key=lambda r: r.mu_hz)):
                weight = _filter_weight(bundle, record.map_index, channel)
                slots.setdefault((channel, slot), []).append((record, weight))

    summaries = []
    for (channel, slot), members in slots.items():
        weights = np.array([weight for _, weight in members])
        summaries.append(FilterSlotSummary(
            channel=channel,
            slot=slot,
            mean_mu_hz=float(np.mean([record.mu_hz for record, _ in members])),
            mean_h_hz=float(np.mean([record.h_hz for record, _ in members])),
            mean_beta_eff=float(np.mean([record.beta_eff for record, _ in members])),
            mean_abs_weight=float(weights.mean()),
            max_abs_weight=float(weights.max()),
            n_folds=len(members),
        ))
    return summaries


def curve_grid(fs: float, resolution_hz: float = 0.1) -> np.ndarray:
    """Fine 0..fs/2 grid for exported filter curves."""
    return np.arange(0.0, fs / 2.0 + resolution_hz / 2, resolution_hz)

