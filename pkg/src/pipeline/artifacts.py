"""Artifact file layout and deterministic writers shared by the pipeline commands."""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from src.utils.logger import app_logger as logger


@dataclass(frozen=True)
class ArtifactLayout:
    """Where every command reads and writes, relative to one output directory."""

    root: Path

    @property
    def prepared_dir(self) -> Path:
        return self.root / "prepared"

    @property
    def models_dir(self) -> Path:
        return self.root / "models"

    @property
    def explain_dir(self) -> Path:
        return self.root / "explain"

    @property
    def train_data(self) -> Path:
        return self.prepared_dir / "train.frx"

    @property
    def test_data(self) -> Path:
        return self.prepared_dir / "test.frx"

    @property
    def balanced_train_data(self) -> Path:
        return self.prepared_dir / "balanced_train.frx"

    @property
    def encoding(self) -> Path:
        return self.prepared_dir / "encoding.json"

    @property
    def stacking_model(self) -> Path:
        return self.models_dir / "stacking.json"

    @property
    def selection_model(self) -> Path:
        return self.models_dir / "selection.json"

    @property
    def logreg_model(self) -> Path:
        return self.models_dir / "logreg.json"

    @property
    def tree_model(self) -> Path:
        return self.models_dir / "decision_tree.json"

    @property
    def training_summary(self) -> Path:
        return self.root / "training.json"

    @property
    def cv_auc(self) -> Path:
        return self.root / "cv_auc.csv"

    @property
    def class_balance(self) -> Path:
        return self.root / "class_balance.csv"

    @property
    def trials(self) -> Path:
        return self.root / "trials.csv"

    @property
    def metrics(self) -> Path:
        return self.root / "metrics.json"

    @property
    def comparison(self) -> Path:
        return self.root / "comparison.csv"

    @property
    def report(self) -> Path:
        return self.root / "report.json"


def write_json(doc: Mapping[str, Any], path: Path) -> Path:
    """Pretty JSON with a trailing newline; key order is the caller's."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    logger.debug(f"Wrote {path}")
    return path


def read_json(path: Path) -> Any:
    return json.loads(require(path).read_text(encoding="utf-8"))


def require(path: Path, produced_by: str = "") -> Path:
    """Return ``path`` if it exists.

    Raises:
        FileNotFoundError: Naming the command that produces the file
    """
    path = Path(path)
    if not path.exists():
        hint = f"; run '{produced_by}' first" if produced_by else ""
        raise FileNotFoundError(f"{path} not found{hint}")
    return path
