"""
Spectral Miner - Evaluation

Metrics, class-difference statistics and interpretation exports.
Cross-validation lives in ``evaluation.cross_validation``.
"""

from evaluation.metrics import uar, classify, evaluate
from evaluation.statistics import MagnitudeProfile, two_sample_ttest, magnitude_profile_relative_change
from evaluation.interpretation import (
    filter_curves,
    weighted_filter_curves,
    top_features,
    dedupe_top_features,
    connectivity_edges,
    raw_features,
    feature_distributions,
    export_interpretation,
    best_fold,
    aggregate_fold_filters,
)

__all__ = [
    "uar",
    "classify",
    "evaluate",
    "MagnitudeProfile",
    "two_sample_ttest",
    "magnitude_profile_relative_change",
    "filter_curves",
    "weighted_filter_curves",
    "top_features",
    "dedupe_top_features",
    "connectivity_edges",
    "raw_features",
    "feature_distributions",
    "export_interpretation",
    "best_fold",
    "aggregate_fold_filters",
]
