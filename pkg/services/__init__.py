"""
Spectral Miner - Services Package

Dataset I/O, the synthetic dataset generator and run-directory storage.
"""

from services.dataset_io import (
    read_manifest,
    load_dataset,
    save_dataset,
    MANIFEST_NAME,
    GROUND_TRUTH_NAME,
)
from services.synthetic import generate_synthetic, band_component
from services.run_storage import RunStorage

__all__ = [
    "read_manifest",
    "load_dataset",
    "save_dataset",
    "MANIFEST_NAME",
    "GROUND_TRUTH_NAME",
    "generate_synthetic",
    "band_component",
    "RunStorage",
]
