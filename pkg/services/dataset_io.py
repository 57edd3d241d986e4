"""
Dataset I/O

On-disk dataset format: a JSON manifest plus one little-endian float32
file per trial holding a row-major [C x N] matrix.

Storage structure:
- {dataset_dir}/
    - manifest.json        # DatasetManifest
    - ground_truth.json    # planted effects (synthetic datasets only)
    - trials/
        - {trial_id}.f32   # C * N float32 values
"""

import json
import logging
from pathlib import Path
from typing import Optional

import numpy as np

from common.errors import DatasetError, NotFoundError
from dsp.spectral import standardize_trial
from schemas.dataset import Dataset, DatasetManifest, GroundTruth, TrialEntry

logger = logging.getLogger("spectral_miner.services.dataset_io")

TRIAL_DTYPE = "<f4"
MANIFEST_NAME = "manifest.json"
GROUND_TRUTH_NAME = "ground_truth.json"


def read_manifest(manifest_path: Path) -> DatasetManifest:
    """Parse and validate a manifest file."""
    manifest_path = Path(manifest_path)
    if manifest_path.is_dir():
        manifest_path = manifest_path / MANIFEST_NAME
    if not manifest_path.exists():
        raise NotFoundError(f"Dataset manifest not found: {manifest_path}")
    with open(manifest_path, "r") as f:
        return DatasetManifest.model_validate(json.load(f))


def load_trial(path: Path, entry: TrialEntry, n_channels: int) -> np.ndarray:
    """
    Read one trial file as a float64 [C x N] matrix.

    Raises:
        DatasetError: If the file is missing or its size does not match the manifest
    """
    if not path.exists():
        raise DatasetError("Trial file is missing", trial=entry.file)
    values = np.fromfile(path, dtype=TRIAL_DTYPE)
    expected = n_channels * entry.n_samples
    if values.size != expected:
        if values.size % entry.n_samples == 0:
            raise DatasetError(
                f"File has {values.size // entry.n_samples} rows of {entry.n_samples} samples, "
                f"manifest declares {n_channels} channels",
                trial=entry.file,
            )
        raise DatasetError(
            f"File holds {values.size} values, expected {n_channels} x {entry.n_samples} = {expected}",
            trial=entry.file,
        )
    return values.reshape(n_channels, entry.n_samples).astype(np.float64)


def load_dataset(manifest_path: Path) -> Dataset:
    """
    Load and standardize every trial listed in a manifest.

    Args:
        manifest_path: Manifest file, or the dataset directory holding manifest.json

    Returns:
        Dataset with channel order taken from the manifest

    Raises:
        NotFoundError: If the manifest does not exist
        DatasetError: For an empty trial list, fewer than 2 subjects or a
            trial file that does not match the manifest
    """
    manifest_path = Path(manifest_path)
    if manifest_path.is_dir():
        manifest_path = manifest_path / MANIFEST_NAME
    manifest = read_manifest(manifest_path)
    if not manifest.trials:
        raise DatasetError(f"Manifest {manifest_path} lists no trials")
    if len(manifest.subjects) < 2:
        raise DatasetError(f"Dataset needs at least 2 subjects, manifest lists {len(manifest.subjects)}")

    root = manifest_path.parent
    trials = []
    for entry in manifest.trials:
        raw = load_trial(root / entry.file, entry, manifest.n_channels)
        trials.append(standardize_trial(
            raw,
            manifest.fs,
            entry.label,
            entry.subject_id,
            entry.trial_id or Path(entry.file).stem,
        ))

    degenerate = sum(trial.degenerate for trial in trials)
    logger.info(
        f"Loaded {len(trials)} trials of {len(manifest.subjects)} subjects from {manifest_path}"
        + (f" ({degenerate} degenerate)" if degenerate else "")
    )
    return Dataset(fs=manifest.fs, channel_names=manifest.channel_names, trials=trials)


def save_dataset(
    dataset: Dataset,
    out_dir: Path,
    ground_truth: Optional[GroundTruth] = None
) -> Path:
    """
    Write trials, the optional ground truth and (last) the manifest.

    Returns:
        Path of the written manifest
    """
    out_dir = Path(out_dir)
    trials_dir = out_dir / "trials"
    trials_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    for index, trial in enumerate(dataset.trials):
        trial_id = trial.trial_id or f"trial_{index:05d}"
        relative = f"trials/{trial_id}.f32"
        trial.data.astype(TRIAL_DTYPE).tofile(out_dir / relative)
        entries.append(TrialEntry(
            file=relative,
            subject_id=trial.subject_id,
            label=trial.label,
            n_samples=trial.n_samples,
            trial_id=trial_id,
        ))

    if ground_truth is not None:
        with open(out_dir / GROUND_TRUTH_NAME, "w") as f:
            f.write(ground_truth.model_dump_json(indent=2))

    manifest = DatasetManifest(fs=dataset.fs, channel_names=dataset.channel_names, trials=entries)
    manifest_path = out_dir / MANIFEST_NAME
    with open(manifest_path, "w") as f:
        f.write(manifest.model_dump_json(indent=2))

    logger.info(f"Saved {len(entries)} trials to {out_dir}")
    return manifest_path
