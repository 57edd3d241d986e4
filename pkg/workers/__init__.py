"""
Workers Package

Fold jobs and the joblib fold pool used by cross-validation.
"""

from workers.fold_job import FoldJob, FoldOutcome, fold_rng, run_fold_job
from workers.pool import run_fold_jobs

__all__ = [
    # Jobs
    "FoldJob",
    "FoldOutcome",
    "fold_rng",
    "run_fold_job",
    # Pool
    "run_fold_jobs",
]
