"""
Fold Job

Trains, evaluates and interprets one subject-held-out fold. Jobs share
no state, so any number can run in parallel.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from evaluation.interpretation import export_interpretation
from evaluation.metrics import evaluate
from model.state import save_checkpoint
from schemas.dataset import Dataset
from schemas.reports import FoldReport, InterpretationBundle
from schemas.training import TrainConfig
from services.run_storage import RunStorage
from training.trainer import train

logger = logging.getLogger("spectral_miner.workers.fold_job")


@dataclass
class FoldJob:
    """Everything one fold needs."""
    fold_index: int
    n_folds: int
    train_subjects: list[str]
    val_subjects: list[str]
    config: TrainConfig
    top_k: int = 10

    @property
    def name(self) -> str:
        return f"fold_{self.fold_index:02d}"


@dataclass
class FoldOutcome:
    report: FoldReport
    bundle: InterpretationBundle


def fold_rng(seed: int, fold_index: int) -> np.random.Generator:
    """Independent generator per fold, derived from the run seed."""
    return np.random.default_rng(np.random.SeedSequence([seed, fold_index]))


def run_fold_job(job: FoldJob, dataset: Dataset, run_root: Optional[Path] = None) -> FoldOutcome:
    """
    Run one fold.

    This job:
    1. Trains on the training subjects (oversampling happens inside)
    2. Evaluates on the held-out subjects with window averaging
    3. Exports the interpretation bundle from the training trials
    4. Saves checkpoint, history and exports when ``run_root`` is given

    Args:
        job: Fold definition
        dataset: Full dataset; the fold selects its subjects
        run_root: Run directory to write artifacts into

    Returns:
        FoldOutcome with the fold report and interpretation bundle
    """
    logger.info(
        f"Fold {job.fold_index + 1}/{job.n_folds}: {len(job.train_subjects)} train / "
        f"{len(job.val_subjects)} validation subjects"
    )
    train_trials = dataset.subset(set(job.train_subjects))
    val_trials = dataset.subset(set(job.val_subjects))

    try:
        result = train(
            job.config,
            train_trials,
            channel_names=dataset.channel_names,
            rng=fold_rng(job.config.seed, job.fold_index),
        )
        report = evaluate(result.state, val_trials, job.config.window_s)
        bundle = export_interpretation(result.state, train_trials, job.top_k, job.config.window_s)
    except Exception as e:
        logger.error(f"Fold {job.fold_index} failed: {str(e)}")
        raise

    checkpoint_path = interpretation_path = None
    if run_root is not None:
        storage = RunStorage(run_root)
        checkpoint_path = save_checkpoint(result.state, job.config, storage.checkpoint_path(job.name))
        interpretation_path = storage.save_interpretation(job.name, bundle)
        storage.save_history(job.name, result.history)
        storage.save_eval_report(job.name, report)

    fold_report = FoldReport(
        fold_index=job.fold_index,
        train_subjects=sorted(job.train_subjects),
        val_subjects=sorted(job.val_subjects),
        val_uar=report.uar,
        history=result.history,
        checkpoint_path=str(checkpoint_path.relative_to(run_root)) if checkpoint_path else None,
        interpretation_path=str(interpretation_path.relative_to(run_root)) if interpretation_path else None,
        filters=bundle.bank.filters,
        top_features=bundle.top_features,
    )
    logger.info(f"Fold {job.fold_index + 1}/{job.n_folds} completed: validation UAR {report.uar:.4f}")
    return FoldOutcome(report=fold_report, bundle=bundle)
