"""
Cross-Validation

Subject-held-out cross-validation. Subjects are split into seeded random
folds; every fold trains on the remaining subjects (oversampled on the
training side only) and is validated on its held-out subjects.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from common.errors import ValidationError
from evaluation.interpretation import aggregate_fold_filters, best_fold
from schemas.dataset import Dataset
from schemas.reports import CVSummary, FilterSlotSummary, FoldReport, InterpretationBundle
from schemas.training import RunConfig
from services.run_storage import RunStorage
from workers.fold_job import FoldJob
from workers.pool import run_fold_jobs

logger = logging.getLogger("spectral_miner.evaluation.cross_validation")


# Step definitions for progress tracking
WORKFLOW_STEPS = [
    {"step": 1, "name": "partition", "description": "Partitioning subjects into folds"},
    {"step": 2, "name": "folds", "description": "Training and validating folds"},
    {"step": 3, "name": "summary", "description": "Summarizing fold results"},
]


def partition_subjects(subjects: list[str], n_folds: int, seed: int) -> list[list[str]]:
    """
    Split subjects into ``n_folds`` seeded random folds of near-equal size.

    Remainder subjects go to the first folds.

    Raises:
        ValidationError: If there are fewer subjects than folds
    """
    subjects = sorted(set(subjects))
    if n_folds < 2:
        raise ValidationError(f"Cross-validation needs at least 2 folds, got {n_folds}")
    if len(subjects) < n_folds:
        raise ValidationError(
            f"{len(subjects)} subjects cannot fill {n_folds} folds; "
            f"lower the fold count with --folds {len(subjects)} or fewer"
        )
    order = np.random.default_rng(seed).permutation(len(subjects))
    return [sorted(subjects[i] for i in chunk.tolist()) for chunk in np.array_split(order, n_folds)]


@dataclass
class CVResult:
    folds: list[FoldReport]
    summary: CVSummary
    bundles: list[InterpretationBundle] = field(default_factory=list, repr=False)
    filter_slots: list[FilterSlotSummary] = field(default_factory=list)


def summarize(folds: list[FoldReport], config: RunConfig) -> CVSummary:
    """Mean, population std and best fold of the validation UARs."""
    uars = np.array([fold.val_uar for fold in folds])
    return CVSummary(
        feature_kind=config.feature_kind,
        n_folds=len(folds),
        seed=config.seed,
        fold_uars=uars.tolist(),
        mean_uar=float(uars.mean()),
        std_uar=float(uars.std()),
        best_fold=best_fold(folds).fold_index,
    )


class CrossValidationRunner:
    """
    Orchestrates one cross-validation run.

    The workflow executes in this order:
    1. Partition - seeded subject folds
    2. Folds - train, evaluate and interpret every fold (optionally in parallel)
    3. Summary - mean/std UAR, best fold, fold-averaged filters
    """

    def __init__(
        self,
        config: RunConfig,
        dataset: Dataset,
        storage: Optional[RunStorage] = None,
        progress_callback: Optional[Callable[[dict], None]] = None
    ):
        """
        Initialize the runner.

        Args:
            config: Run configuration (fold count, jobs, seed, training settings)
            dataset: Dataset to cross-validate on
            storage: Run directory to write artifacts into
            progress_callback: Optional callback for progress updates
        """
        self.config = config
        self.dataset = dataset
        self.storage = storage
        self.progress_callback = progress_callback

        # Progress tracking
        self.current_step = 0
        self.total_steps = len(WORKFLOW_STEPS)
        self.status = "pending"

        logger.info(
            f"Initialized cross-validation: {config.folds} folds, {len(dataset.subjects)} subjects, "
            f"{config.feature_kind.value} features"
        )

    def _log(self, message: str, level: str = "info"):
        """Log a workflow message and notify the callback."""
        log_method = getattr(logger, level.lower(), logger.info)
        log_method(message)

        if self.progress_callback:
            self.progress_callback(self._get_progress())

    def _get_progress(self) -> dict:
        """Get current progress status."""
        step_info = WORKFLOW_STEPS[self.current_step - 1] if self.current_step > 0 else None
        return {
            "current_step": self.current_step,
            "total_steps": self.total_steps,
            "step_name": step_info["name"] if step_info else None,
            "step_description": step_info["description"] if step_info else "Initializing",
            "progress_percent": int((self.current_step / self.total_steps) * 100) if self.current_step > 0 else 0,
            "status": self.status,
        }

    def _start_step(self, step_num: int):
        self.current_step = step_num
        step = WORKFLOW_STEPS[step_num - 1]
        self._log(f"Step {step_num}/{self.total_steps}: {step['description']}...")

    def _complete_step(self, step_num: int, success: bool = True):
        step = WORKFLOW_STEPS[step_num - 1]
        status = "completed" if success else "failed"
        self._log(f"Step {step_num} ({step['name']}) {status}", "info" if success else "error")

    def build_jobs(self, folds: list[list[str]]) -> list[FoldJob]:
        """One job per fold; the other folds' subjects form its training side."""
        all_subjects = set(self.dataset.subjects)
        train_config = self.config.train_config()
        return [
            FoldJob(
                fold_index=index,
                n_folds=len(folds),
                train_subjects=sorted(all_subjects - set(val_subjects)),
                val_subjects=val_subjects,
                config=train_config,
                top_k=self.config.top_k,
            )
            for index, val_subjects in enumerate(folds)
        ]

    def run(self) -> CVResult:
        """
        Run the complete cross-validation workflow.

        Returns:
            CVResult with fold reports, summary and fold-averaged filters
        """
        self.status = "running"
        self._log("Starting cross-validation workflow")
        try:
            self._start_step(1)
            folds = partition_subjects(self.dataset.subjects, self.config.folds, self.config.seed)
            jobs = self.build_jobs(folds)
            self._complete_step(1)

            self._start_step(2)
            run_root: Optional[Path] = self.storage.root if self.storage else None
            outcomes = run_fold_jobs(jobs, self.dataset, self.config.jobs, run_root)
            self._complete_step(2)

            self._start_step(3)
            reports = [outcome.report for outcome in outcomes]
            bundles = [outcome.bundle for outcome in outcomes]
            result = CVResult(
                folds=reports,
                summary=summarize(reports, self.config),
                bundles=bundles,
                filter_slots=aggregate_fold_filters(bundles),
            )
            if self.storage:
                for report in reports:
                    self.storage.save_fold_report(report)
                self.storage.save_histories(reports)
                self.storage.save_model_list("exports/filter_slots.json", result.filter_slots)
                self.storage.save_summary(result.summary)
            self._complete_step(3)

            self.status = "completed"
            self._log(
                f"Cross-validation completed: UAR {result.summary.mean_uar:.4f} "
                f"+- {result.summary.std_uar:.4f} (best fold {result.summary.best_fold})"
            )
            return result

        except Exception as e:
            self.status = "failed"
            self._log(f"Cross-validation failed: {str(e)}", "error")
            raise


def cross_validate(
    config: RunConfig,
    dataset: Dataset,
    storage: Optional[RunStorage] = None
) -> CVResult:
    """Convenience function to run subject-held-out cross-validation."""
    return CrossValidationRunner(config, dataset, storage).run()
