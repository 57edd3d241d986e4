"""
Report Schemas

Data models for training histories, evaluation reports, cross-validation
fold reports and interpretation bundles.
"""

from typing import Optional

from pydantic import BaseModel, Field, model_validator

from schemas.filters import BankRecord, FeatureIndexEntry, FeatureKind, FilterRecord
from schemas.training import TrainConfig


class EpochRecord(BaseModel):
    """One row of the training history."""
    epoch: int = Field(..., ge=0, description="Epoch index")
    mean_loss: float = Field(..., description="Mean batch loss over the epoch")
    train_uar: float = Field(..., description="UAR of training-window predictions")
    lr: float = Field(..., description="Learning rate of the epoch's last step")


class HeadRecord(BaseModel):
    """Serialized classifier and batch-norm statistics."""
    weights: list[float] = Field(..., description="Classifier weights [D]")
    bias: float = Field(..., description="Classifier bias")
    running_mean: list[float] = Field(..., description="Batch-norm running mean [D]")
    running_var: list[float] = Field(..., description="Batch-norm running variance [D]")
    bn_momentum: float = Field(default=0.1, description="Running-statistics momentum")
    bn_eps: float = Field(default=1e-5, description="Variance guard")
    feature_index_map_ref: str = Field(
        default="feature_index_map.json",
        description="File holding the feature index map for these weights"
    )


class CheckpointRecord(BaseModel):
    """Everything needed to rebuild a trained model."""
    config: TrainConfig = Field(..., description="Training configuration")
    fs: float = Field(..., gt=0, description="Sampling rate the model was trained at")
    channel_names: list[str] = Field(default_factory=list, description="Electrode names")
    bank: BankRecord = Field(..., description="Filter bank")
    head: HeadRecord = Field(..., description="Classifier and batch-norm statistics")
    step: int = Field(default=0, ge=0, description="Optimizer steps taken")


class TrialPrediction(BaseModel):
    """Averaged prediction for one evaluated trial."""
    trial_id: str = Field(..., description="Trial identifier")
    subject_id: str = Field(..., description="Subject identifier")
    label: int = Field(..., description="True label")
    probability: float = Field(..., description="Mean window probability")
    predicted: int = Field(..., description="Predicted label (probability > 0.5)")
    n_windows: int = Field(..., ge=1, description="Windows averaged")


class EvalReport(BaseModel):
    """Evaluation of a model on a set of trials."""
    uar: float = Field(..., description="Unweighted average recall over trials")
    n_trials: int = Field(..., description="Trials evaluated")
    predictions: list[TrialPrediction] = Field(default_factory=list, description="Per-trial results")


class FoldReport(BaseModel):
    """Outcome of one subject-held-out fold."""
    fold_index: int = Field(..., ge=0, description="Fold number")
    train_subjects: list[str] = Field(..., description="Subjects used for training")
    val_subjects: list[str] = Field(..., description="Held-out subjects")
    val_uar: float = Field(..., description="Validation UAR")
    history: list[EpochRecord] = Field(default_factory=list, description="Training history")
    checkpoint_path: Optional[str] = Field(default=None, description="Saved final model")
    interpretation_path: Optional[str] = Field(default=None, description="Saved interpretation bundle")
    filters: list[FilterRecord] = Field(default_factory=list, description="Learned filters")
    top_features: list["TopFeature"] = Field(default_factory=list, description="Largest-|weight| features")

    @model_validator(mode="after")
    def _disjoint(self) -> "FoldReport":
        overlap = set(self.train_subjects) & set(self.val_subjects)
        if overlap:
            raise ValueError(f"subjects in both train and validation: {sorted(overlap)}")
        return self


class CVSummary(BaseModel):
    """Mean and spread of validation UAR across folds."""
    feature_kind: FeatureKind = Field(..., description="Feature module")
    n_folds: int = Field(..., description="Number of folds")
    seed: int = Field(..., description="Run seed")
    fold_uars: list[float] = Field(..., description="Validation UAR per fold")
    mean_uar: float = Field(..., description="Mean validation UAR")
    std_uar: float = Field(..., description="Population std of validation UAR")
    best_fold: int = Field(..., description="Fold with the highest validation UAR")


# ============================================================================
# Interpretation
# ============================================================================

class FeatureWeight(BaseModel):
    """Classifier weight of one feature."""
    index: int = Field(..., description="Feature index")
    name: str = Field(..., description="Readable feature name")
    weight: float = Field(..., description="Classifier weight (importance and direction)")


class TopFeature(BaseModel):
    """A feature ranked by |weight|, with the filters that produce it."""
    rank: int = Field(..., ge=1, description="1 = largest |weight|")
    index: int = Field(..., description="Feature index")
    name: str = Field(..., description="Readable feature name")
    weight: float = Field(..., description="Classifier weight")
    map_index: int = Field(..., description="Feature map")
    channels: list[str] = Field(..., description="Electrode or electrode pair")
    filters: list[FilterRecord] = Field(default_factory=list, description="Filters feeding the feature")


class TTestResult(BaseModel):
    """Independent two-sample (pooled variance) t-test between the classes."""
    index: int = Field(..., description="Feature index")
    name: str = Field(..., description="Readable feature name")
    t_statistic: float = Field(..., description="t statistic (class 1 minus class 0)")
    p_value: float = Field(..., description="Two-sided p-value")
    n_class_0: int = Field(..., description="Samples in class 0")
    n_class_1: int = Field(..., description="Samples in class 1")
    mean_class_0: float = Field(..., description="Mean raw feature value in class 0")
    mean_class_1: float = Field(..., description="Mean raw feature value in class 1")


class FeatureDistribution(BaseModel):
    """Raw (unstandardized) feature values split by class."""
    index: int = Field(..., description="Feature index")
    name: str = Field(..., description="Readable feature name")
    class_0: list[float] = Field(default_factory=list, description="Values of class-0 trials")
    class_1: list[float] = Field(default_factory=list, description="Values of class-1 trials")
    quartiles: list[float] = Field(
        default_factory=list,
        description="25/50/75 percentiles over all trials"
    )


class ConnectivityEdge(BaseModel):
    """A channel pair weighted by its classifier weight."""
    channel_a: str = Field(..., description="First electrode")
    channel_b: str = Field(..., description="Second electrode")
    map_index: int = Field(..., description="Feature map")
    weight: float = Field(..., description="Classifier weight")
    center_a_hz: float = Field(..., description="Center frequency of the filter on channel_a")
    center_b_hz: float = Field(..., description="Center frequency of the filter on channel_b")
    cross_frequency: bool = Field(..., description="True when the two filters differ in band")


class InterpretationBundle(BaseModel):
    """Everything exported for interpreting a trained model."""
    feature_kind: FeatureKind = Field(..., description="Feature module")
    bank: BankRecord = Field(..., description="Learned filters")
    feature_index_map: list[FeatureIndexEntry] = Field(default_factory=list, description="Index map")
    weights: list[FeatureWeight] = Field(default_factory=list, description="Weights keyed by feature")
    distributions: list[FeatureDistribution] = Field(default_factory=list, description="Per-class values")
    ttests: list[TTestResult] = Field(default_factory=list, description="t-tests of top features")
    top_features: list[TopFeature] = Field(default_factory=list, description="Top-k by |weight|")
    edges: list[ConnectivityEdge] = Field(default_factory=list, description="Connectivity edges")
    warnings: list[str] = Field(default_factory=list, description="Non-fatal issues")


class FilterSlotSummary(BaseModel):
    """One channel's k-th lowest-center filter averaged across folds."""
    channel: Optional[str] = Field(default=None, description="Electrode (None when shared)")
    slot: int = Field(..., description="Rank of the filter by center frequency")
    mean_mu_hz: float = Field(..., description="Mean center frequency")
    mean_h_hz: float = Field(..., description="Mean bandwidth")
    mean_beta_eff: float = Field(..., description="Mean effective shape")
    mean_abs_weight: float = Field(..., description="Mean |weight| of the slot's feature")
    max_abs_weight: float = Field(..., description="Max |weight| of the slot's feature")
    n_folds: int = Field(..., description="Folds contributing")


FoldReport.model_rebuild()
