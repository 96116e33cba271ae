"""Evaluate stage: score the held-out test set and the balanced training set."""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Tuple

import numpy as np
import pandas as pd

from src.baselines.logistic import load_linear
from src.data.container import read_container
from src.ensemble.stacking import BASE_NAMES, StackingModel, load_stacking
from src.evaluation.metrics import EvalReport, evaluate
from src.evaluation.reporting import comparison_frame, confusion_frame, write_csv, write_curves
from src.gbdt.persistence import load_model
from src.pipeline.artifacts import ArtifactLayout, require, write_json
from src.pipeline.run_config import RunConfig
from src.utils.errors import stage
from src.utils.logger import app_logger as logger


@dataclass(frozen=True)
class EvaluationOutcome:
    test: EvalReport
    balanced_train: EvalReport
    comparison: pd.DataFrame


def score_container(model: StackingModel, path: Path) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(aligned feature matrix, labels, stacked probabilities) for a prepared file."""
    table, _ = read_container(path)
    X = model.align(table.to_matrix(table.feature_names), table.feature_names)
    return X, table.labels(), model.predict_proba(X)


def run_evaluate(cfg: RunConfig) -> EvaluationOutcome:
    """Write metrics.json, curve CSVs and the model comparison table.

    Raises:
        StageError: Tagged ``evaluate:<step>`` on any failure
    """
    layout = ArtifactLayout(cfg.output_dir)

    with stage("evaluate:load"):
        model = load_stacking(require(layout.stacking_model, "train"))
        require(layout.test_data, "prepare")
        require(layout.balanced_train_data, "train")

    with stage("evaluate:test"):
        X_test, y_test, proba = score_container(model, layout.test_data)
        test_report = evaluate(proba, y_test, model.threshold)
        logger.info(
            f"Test: accuracy {test_report.scores.accuracy:.4f}, AUC {test_report.auc_roc:.4f}, "
            f"fraud recall {test_report.scores.positive.recall:.4f}"
        )

    with stage("evaluate:balanced_train"):
        _, y_bal, proba_bal = score_container(model, layout.balanced_train_data)
        balanced_report = evaluate(proba_bal, y_bal, model.threshold)

    with stage("evaluate:comparison"):
        reports: Dict[str, EvalReport] = {"stacking": test_report}
        for name in BASE_NAMES:
            reports[name] = evaluate(model.component(name).predict_proba(X_test), y_test, 0.5)
        if layout.logreg_model.exists():
            logreg = load_linear(layout.logreg_model)
            reports["logistic_regression"] = evaluate(logreg.predict_proba(X_test), y_test, 0.5)
        if layout.tree_model.exists():
            tree = load_model(layout.tree_model)
            reports["decision_tree"] = evaluate(tree.predict_proba(X_test), y_test, 0.5)
        comparison = comparison_frame(reports)

    with stage("evaluate:write"):
        write_json({"test": test_report.to_dict(), "balanced_train": balanced_report.to_dict()}, layout.metrics)
        write_curves(test_report, cfg.output_dir)
        write_csv(confusion_frame(balanced_report), cfg.output_dir / "balanced_train_confusion.csv")
        write_csv(comparison, layout.comparison)

    return EvaluationOutcome(test_report, balanced_report, comparison)
