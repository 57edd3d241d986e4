"""
Spectral Miner - Pydantic Schemas

Data models for trials, filters, configuration, datasets and reports.
"""

from schemas.trial import TrialTensor, Spectrum, TrialBatch
from schemas.filters import (
    FeatureKind,
    FilterLayout,
    FilterParams,
    FilterRecord,
    BankRecord,
    FeatureIndexEntry,
)
from schemas.training import ClampBounds, TrainConfig, RunConfig
from schemas.dataset import (
    TrialEntry,
    DatasetManifest,
    Dataset,
    MagnitudeBoost,
    CorrelationLink,
    PhaseLock,
    SynthSpec,
    GroundTruth,
)
from schemas.reports import (
    EpochRecord,
    HeadRecord,
    CheckpointRecord,
    TrialPrediction,
    EvalReport,
    FoldReport,
    CVSummary,
    FeatureWeight,
    TopFeature,
    TTestResult,
    FeatureDistribution,
    ConnectivityEdge,
    InterpretationBundle,
    FilterSlotSummary,
)

__all__ = [
    # Trials
    "TrialTensor",
    "Spectrum",
    "TrialBatch",
    # Filters
    "FeatureKind",
    "FilterLayout",
    "FilterParams",
    "FilterRecord",
    "BankRecord",
    "FeatureIndexEntry",
    # Training
    "ClampBounds",
    "TrainConfig",
    "RunConfig",
    # Dataset
    "TrialEntry",
    "DatasetManifest",
    "Dataset",
    "MagnitudeBoost",
    "CorrelationLink",
    "PhaseLock",
    "SynthSpec",
    "GroundTruth",
    # Reports
    "EpochRecord",
    "HeadRecord",
    "CheckpointRecord",
    "TrialPrediction",
    "EvalReport",
    "FoldReport",
    "CVSummary",
    "FeatureWeight",
    "TopFeature",
    "TTestResult",
    "FeatureDistribution",
    "ConnectivityEdge",
    "InterpretationBundle",
    "FilterSlotSummary",
]
