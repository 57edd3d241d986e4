"""
Fold Pool

Runs fold jobs sequentially or on a joblib process pool. Results come
back in job order either way, so the pool size never changes the output.
"""

import logging
from pathlib import Path
from typing import Optional

from joblib import Parallel, delayed

from common.errors import ValidationError
from schemas.dataset import Dataset
from workers.fold_job import FoldJob, FoldOutcome, run_fold_job

logger = logging.getLogger("spectral_miner.workers.pool")


def run_fold_jobs(
    jobs: list[FoldJob],
    dataset: Dataset,
    n_jobs: int = 1,
    run_root: Optional[Path] = None
) -> list[FoldOutcome]:
    """
    Run every fold job.

    Args:
        jobs: Fold definitions
        dataset: Dataset shared by all folds (copied into each worker)
        n_jobs: Worker processes; 1 runs in-process
        run_root: Run directory for per-fold artifacts

    Returns:
        One FoldOutcome per job, in job order
    """
    if n_jobs < 1:
        raise ValidationError(f"--jobs must be at least 1, got {n_jobs}")
    if n_jobs == 1:
        return [run_fold_job(job, dataset, run_root) for job in jobs]

    workers = min(n_jobs, len(jobs))
    logger.info(f"Running {len(jobs)} folds on {workers} worker processes")
    return Parallel(n_jobs=workers, backend="loky")(
        delayed(run_fold_job)(job, dataset, run_root) for job in jobs
    )
