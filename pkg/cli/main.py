"""
Spectral Miner command line.

Usage:
    python -m cli synth --spec configs/synth_magnitude.json --out data/magnitude
    python -m cli train --config configs/train_magnitude.json --dataset data/magnitude
    python -m cli eval --name magnitude --dataset data/magnitude
    python -m cli cv --config configs/cv_magnitude.json --folds 3 --jobs 4
    python -m cli export --name magnitude --dataset data/magnitude

Exit codes: 0 success, 1 invalid input or configuration, 2 runtime or
numerical failure.
"""

import argparse
import json
import logging
import sys
import traceback
from pathlib import Path
from typing import Callable, Optional

from pydantic import ValidationError as PydanticValidationError

from common.errors import EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION, MinerError, NotFoundError, ShapeMismatchError, ValidationError
from config.logging_config import setup_logging
from config.settings import settings
from evaluation.cross_validation import cross_validate
from evaluation.interpretation import curve_grid, export_interpretation, filter_curves, weighted_filter_curves
from evaluation.metrics import evaluate
from evaluation.statistics import magnitude_profile_relative_change
from model.state import ModelState, load_checkpoint, save_checkpoint
from schemas.dataset import Dataset, SynthSpec
from schemas.filters import FeatureKind
from schemas.training import RunConfig, TrainConfig
from services.dataset_io import load_dataset, save_dataset
from services.run_storage import RunStorage
from services.synthetic import generate_synthetic
from training.trainer import train

logger = logging.getLogger("spectral_miner.cli")

CONFIGS_DIR = Path(__file__).resolve().parent.parent / "configs"
DEFAULT_SYNTH_SPEC = CONFIGS_DIR / "synth_magnitude.json"
MODEL_NAME = "model"

# Flags that map one-to-one onto RunConfig fields
RUN_CONFIG_FLAGS = ("seed", "out", "jobs", "folds", "name", "dataset", "top_k", "epochs", "feature_kind")


# ============================================================================
# Configuration
# ============================================================================

def read_json(path: Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise NotFoundError(f"Config file not found: {path}")
    with open(path, "r") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ValidationError(f"{path} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise ValidationError(f"{path} must hold a JSON object")
    return data


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """Settings defaults, then the config file, then command-line flags."""
    data = {
        "folds": settings.default_folds,
        "jobs": settings.default_jobs,
        "out": str(settings.runs_dir),
    }
    if args.config is not None:
        data.update(read_json(args.config))
    for flag in RUN_CONFIG_FLAGS:
        value = getattr(args, flag, None)
        if value is not None:
            data[flag] = str(value) if isinstance(value, Path) else value
    return RunConfig.model_validate(data)


def load_synth_spec(args: argparse.Namespace) -> SynthSpec:
    data = read_json(args.spec or args.config or DEFAULT_SYNTH_SPEC)
    if args.seed is not None:
        data["seed"] = args.seed
    return SynthSpec.model_validate(data)


def require_dataset(config: RunConfig) -> Dataset:
    if config.dataset is None:
        raise ValidationError("No dataset given: pass --dataset or set 'dataset' in the config file")
    return load_dataset(config.dataset)


def resolve_checkpoint(args: argparse.Namespace, storage: RunStorage) -> tuple[ModelState, TrainConfig]:
    path = args.checkpoint or storage.checkpoint_path(MODEL_NAME)
    model, train_config = load_checkpoint(path)
    logger.info(f"Loaded {model.feature_kind.value} checkpoint {path} (step {model.step})")
    return model, train_config


def check_compatible(model: ModelState, dataset: Dataset) -> None:
    if model.n_channels != dataset.n_channels:
        raise ShapeMismatchError(
            f"Checkpoint expects {model.n_channels} channels, dataset has {dataset.n_channels}"
        )
    if model.fs != dataset.fs:
        raise ValidationError(f"Checkpoint was trained at {model.fs} Hz, dataset is sampled at {dataset.fs} Hz")


def open_run(config: RunConfig, log_level: str) -> RunStorage:
    """Create the run directory and point the file log into it."""
    storage = RunStorage.for_run(config.name, config.out)
    setup_logging(log_level, storage.log_file if settings.log_to_file else None)
    logger.info(f"Run directory: {storage.root}")
    return storage


# ============================================================================
# Commands
# ============================================================================

def cmd_synth(args: argparse.Namespace) -> int:
    spec = load_synth_spec(args)
    out_dir = args.out or settings.data_dir / "synthetic"
    dataset, ground_truth = generate_synthetic(spec)
    manifest_path = save_dataset(dataset, out_dir, ground_truth)
    logger.info(f"Dataset written: {manifest_path} ({len(dataset.trials)} trials)")
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    config = load_run_config(args)
    storage = open_run(config, args.log_level)
    dataset = require_dataset(config)

    train_config = config.train_config()
    result = train(train_config, dataset.trials, dataset.channel_names)
    save_checkpoint(result.state, train_config, storage.checkpoint_path(MODEL_NAME))
    storage.save_history("train", result.history)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    config = load_run_config(args)
    storage = open_run(config, args.log_level)
    model, train_config = resolve_checkpoint(args, storage)
    dataset = require_dataset(config)
    check_compatible(model, dataset)

    report = evaluate(model, dataset.trials, train_config.window_s)
    path = storage.save_eval_report("eval", report)
    logger.info(f"UAR {report.uar:.4f} on {report.n_trials} trials, report: {path}")
    return EXIT_OK


def cmd_cv(args: argparse.Namespace) -> int:
    config = load_run_config(args)
    storage = open_run(config, args.log_level)
    dataset = require_dataset(config)
    cross_validate(config, dataset, storage)
    return EXIT_OK


def export_filter_curves(storage: RunStorage, model: ModelState) -> None:
    grid = curve_grid(model.fs)
    record = model.bank.to_record(model.channel_names)
    row_names = [f"{f.channel or 'shared'}@map{f.map_index}" for f in record.filters]

    curves = filter_curves(model.bank, grid)
    storage.save_matrix(f"exports/{MODEL_NAME}_filter_curves.csv", grid, curves.reshape(-1, grid.size), row_names)
    if model.feature_kind == FeatureKind.MAGNITUDE:
        weighted = weighted_filter_curves(model, grid)
        storage.save_matrix(
            f"exports/{MODEL_NAME}_weighted_filter_curves.csv",
            grid,
            weighted.reshape(-1, grid.size),
            row_names,
        )


def cmd_export(args: argparse.Namespace) -> int:
    config = load_run_config(args)
    storage = open_run(config, args.log_level)
    model, train_config = resolve_checkpoint(args, storage)
    dataset = require_dataset(config)
    check_compatible(model, dataset)

    bundle = export_interpretation(model, dataset.trials, config.top_k, train_config.window_s)
    storage.save_interpretation(MODEL_NAME, bundle)
    export_filter_curves(storage, model)

    profile = magnitude_profile_relative_change(dataset)
    storage.save_matrix(
        "exports/magnitude_profile.csv",
        profile.freqs,
        profile.relative_change,
        profile.channel_names,
    )
    logger.info(f"Exported {len(bundle.top_features)} top features to {storage.exports_dir}")
    return EXIT_OK


COMMANDS: dict[str, Callable[[argparse.Namespace], int]] = {
    "synth": cmd_synth,
    "train": cmd_train,
    "eval": cmd_eval,
    "cv": cmd_cv,
    "export": cmd_export,
}


# ============================================================================
# Parser
# ============================================================================

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None, help="JSON config file")
    parser.add_argument("--seed", type=int, default=None, help="Random seed (overrides the config file)")
    parser.add_argument("--out", type=Path, default=None, help="Output root directory")
    parser.add_argument("--log-level", default=None, help="Console log level (default from MINER_LOG_LEVEL)")


def _add_run(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--name", default=None, help="Run name (directory under --out)")
    parser.add_argument("--dataset", type=Path, default=None, help="Dataset manifest or directory")
    parser.add_argument("--jobs", type=int, default=None, help="Fold worker pool size")
    parser.add_argument("--folds", type=int, default=None, help="Cross-validation fold count")
    parser.add_argument("--epochs", type=int, default=None, help="Training epochs")
    parser.add_argument(
        "--feature-kind",
        dest="feature_kind",
        choices=[kind.value for kind in FeatureKind],
        default=None,
        help="Feature module",
    )
    parser.add_argument("--top-k", dest="top_k", type=int, default=None, help="Top features to export")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spectral-miner",
        description="Learn interpretable spectral filters and features from multichannel recordings",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__.split("Usage:")[1] if __doc__ else None,
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    synth = subparsers.add_parser("synth", help="Generate a synthetic dataset")
    _add_common(synth)
    synth.add_argument("--spec", type=Path, default=None, help="Synthetic dataset spec (JSON)")

    train_parser = subparsers.add_parser("train", help="Train a model on a dataset")
    _add_common(train_parser)
    _add_run(train_parser)

    for name, help_text in (("eval", "Evaluate a checkpoint"), ("export", "Export an interpretation bundle")):
        sub = subparsers.add_parser(name, help=help_text)
        _add_common(sub)
        _add_run(sub)
        sub.add_argument("--checkpoint", type=Path, default=None, help="Checkpoint JSON (default: run checkpoint)")

    cv = subparsers.add_parser("cv", help="Subject-held-out cross-validation")
    _add_common(cv)
    _add_run(cv)

    return parser


# ============================================================================
# Entry point
# ============================================================================

def format_validation_error(exc: PydanticValidationError) -> str:
    lines = [f"Invalid {exc.title}:"]
    for error in exc.errors():
        field = ".".join(str(loc) for loc in error["loc"]) or "(root)"
        lines.append(f"  {field}: {error['msg']}")
    return "\n".join(lines)


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    args.log_level = args.log_level or settings.log_level
    setup_logging(args.log_level)

    try:
        return COMMANDS[args.command](args)
    except MinerError as e:
        logger.error(f"{e.error_code}: {e.message}")
        return e.exit_code
    except PydanticValidationError as e:
        logger.error(format_validation_error(e))
        return EXIT_VALIDATION
    except Exception as e:
        logger.error(f"Unhandled exception: {str(e)}")
        logger.error(traceback.format_exc())
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
