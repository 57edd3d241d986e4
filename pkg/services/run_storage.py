"""
Run Storage

File storage for everything a command produces. Artifacts hold no
timestamps so that reruns with the same inputs and seed write identical
files; timestamps live only in the run log.

Storage structure:
- runs/{name}/
    - checkpoints/   # model checkpoints (JSON)
    - reports/       # fold reports, CV summary, eval reports, histories (CSV)
    - exports/       # interpretation bundles, distributions, profiles, filter curves
    - logs/          # run.log
"""

import csv
import json
import logging
from pathlib import Path
from typing import Optional

import numpy as np
from pydantic import BaseModel

from config.settings import RUN_SUBDIRS, settings
from schemas.reports import CVSummary, EpochRecord, EvalReport, FoldReport, InterpretationBundle

logger = logging.getLogger("spectral_miner.services.run_storage")


class RunStorage:
    """Reads and writes the artifacts of one run directory."""

    def __init__(self, root: Path):
        self.root = Path(root)
        for subdir in RUN_SUBDIRS:
            (self.root / subdir).mkdir(parents=True, exist_ok=True)

    @classmethod
    def for_run(cls, name: str, runs_dir: Optional[Path] = None) -> "RunStorage":
        return cls(settings.run_layout(name, runs_dir)["root"])

    @property
    def checkpoints_dir(self) -> Path:
        return self.root / "checkpoints"

    @property
    def reports_dir(self) -> Path:
        return self.root / "reports"

    @property
    def exports_dir(self) -> Path:
        return self.root / "exports"

    @property
    def log_file(self) -> Path:
        return self.root / "logs" / "run.log"

    # =========================================================================
    # Generic writers
    # =========================================================================

    def save_model(self, relative_path: str, model: BaseModel) -> Path:
        """Save a pydantic model as indented JSON."""
        path = self.root / relative_path
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            f.write(model.model_dump_json(indent=2))
        return path

    def save_json(self, relative_path: str, data: dict) -> Path:
        path = self.root / relative_path
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            json.dump(data, f, indent=2)
        return path

    def save_csv(self, relative_path: str, rows: list[list]) -> Path:
        """Write rows (first row is the header)."""
        path = self.root / relative_path
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as f:
            csv.writer(f).writerows(rows)
        return path

    # =========================================================================
    # Training and evaluation
    # =========================================================================

    def save_history(self, name: str, history: list[EpochRecord]) -> Path:
        rows = [["epoch", "mean_loss", "train_uar", "lr"]]
        rows += [[r.epoch, r.mean_loss, r.train_uar, r.lr] for r in history]
        return self.save_csv(f"reports/{name}_history.csv", rows)

    def checkpoint_path(self, name: str) -> Path:
        return self.checkpoints_dir / f"{name}.json"

    def save_eval_report(self, name: str, report: EvalReport) -> Path:
        return self.save_model(f"reports/{name}_eval.json", report)

    # =========================================================================
    # Cross-validation
    # =========================================================================

    def save_fold_report(self, report: FoldReport) -> Path:
        return self.save_model(f"reports/fold_{report.fold_index:02d}.json", report)

    def save_summary(self, summary: CVSummary) -> Path:
        return self.save_model("reports/summary.json", summary)

    def save_histories(self, reports: list[FoldReport]) -> Path:
        """All fold histories in one CSV keyed by fold."""
        rows = [["fold", "epoch", "mean_loss", "train_uar", "lr"]]
        for report in reports:
            rows += [[report.fold_index, r.epoch, r.mean_loss, r.train_uar, r.lr] for r in report.history]
        return self.save_csv("reports/histories.csv", rows)

    # =========================================================================
    # Interpretation
    # =========================================================================

    def save_interpretation(self, name: str, bundle: InterpretationBundle) -> Path:
        """Bundle JSON plus feature distributions as CSV (one row per feature)."""
        path = self.save_model(f"exports/{name}_interpretation.json", bundle)
        self.save_model_list(f"exports/{name}_feature_index_map.json", bundle.feature_index_map)

        rows = [["index", "name", "class", "values"]]
        for distribution in bundle.distributions:
            rows.append([distribution.index, distribution.name, 0, *distribution.class_0])
            rows.append([distribution.index, distribution.name, 1, *distribution.class_1])
        self.save_csv(f"exports/{name}_distributions.csv", rows)
        return path

    def save_model_list(self, relative_path: str, models: list[BaseModel]) -> Path:
        return self.save_json(relative_path, {"items": [m.model_dump(mode="json") for m in models]})

    def save_matrix(
        self,
        relative_path: str,
        freqs: np.ndarray,
        values: np.ndarray,
        row_names: list[str]
    ) -> Path:
        """[rows x bins] matrix as CSV with a frequency header row."""
        header = ["row"] + np.asarray(freqs).tolist()
        body = [[name] + row for name, row in zip(row_names, np.asarray(values).tolist())]
        return self.save_csv(relative_path, [header] + body)
