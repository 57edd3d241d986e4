"""
Metrics

Unweighted average recall and window-averaged evaluation of a trained model.
"""

import logging
from typing import Optional, Sequence

import numpy as np
from sklearn.metrics import recall_score

from common.errors import ValidationError
from dsp.spectral import restandardize
from model.gradients import predict_proba
from model.state import ModelState
from schemas.reports import EvalReport, TrialPrediction
from schemas.trial import TrialTensor
from training.sampling import WindowMode, sample_windows

logger = logging.getLogger("spectral_miner.evaluation.metrics")

DECISION_THRESHOLD = 0.5


def uar(predicted_labels: Sequence[int], true_labels: Sequence[int]) -> float:
    """
    Mean of the per-class recalls.

    Raises:
        ValidationError: If either class is missing from the true labels
    """
    predicted_labels = np.asarray(predicted_labels, dtype=int)
    true_labels = np.asarray(true_labels, dtype=int)
    if predicted_labels.shape != true_labels.shape:
        raise ValidationError(
            f"{predicted_labels.shape[0]} predictions for {true_labels.shape[0]} labels"
        )
    missing = [c for c in (0, 1) if not np.any(true_labels == c)]
    if missing:
        raise ValidationError(f"UAR needs both classes in the true labels; missing {missing}")
    return float(recall_score(true_labels, predicted_labels, labels=[0, 1], average="macro", zero_division=0))


def classify(probability: float) -> int:
    """Class 1 only for probabilities strictly above 0.5."""
    return int(probability > DECISION_THRESHOLD)


def evaluate(
    model: ModelState,
    val_trials: list[TrialTensor],
    window_s: Optional[float] = None
) -> EvalReport:
    """
    Predict every trial by averaging window probabilities.

    The model is switched to Eval mode, so results do not depend on which
    trials are evaluated together. Each trial is split into consecutive
    non-overlapping windows (whole trial when ``window_s`` is None).

    Raises:
        ValidationError: If the evaluated trials do not cover both classes
    """
    model.bn.eval()
    predictions = []
    for index, trial in enumerate(val_trials):
        trial = restandardize(trial)
        if trial.degenerate:
            logger.warning(f"Skipping degenerate trial {trial.trial_id or index} in evaluation")
            continue
        windows = sample_windows(trial, WindowMode.EVAL, window_s)
        probabilities = predict_proba(model, np.stack([window.data for window in windows]), trial.fs)
        mean_probability = float(np.mean(probabilities))
        predictions.append(TrialPrediction(
            trial_id=trial.trial_id or str(index),
            subject_id=trial.subject_id,
            label=trial.label,
            probability=mean_probability,
            predicted=classify(mean_probability),
            n_windows=len(windows),
        ))

    score = uar([p.predicted for p in predictions], [p.label for p in predictions])
    logger.info(f"Evaluated {len(predictions)} trials: UAR {score:.4f}")
    return EvalReport(uar=score, n_trials=len(predictions), predictions=predictions)
