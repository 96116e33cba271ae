"""Report stage: gather run artifacts into report.json and print a summary."""

from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from rich.console import Console
from rich.panel import Panel

from src.data.container import read_container
from src.evaluation.reporting import comparison_table, cv_table, write_csv
from src.pipeline.artifacts import ArtifactLayout, read_json, require, write_json
from src.pipeline.run_config import RunConfig
from src.utils.errors import stage
from src.utils.logger import app_logger as logger

DISTRIBUTION_BINS = 20


def class_histogram(values: np.ndarray, labels: np.ndarray, bins: int = DISTRIBUTION_BINS) -> pd.DataFrame:
    """Per-class counts over shared equal-width bins."""
    edges = np.histogram_bin_edges(values, bins=bins)
    legit, _ = np.histogram(values[labels == 0], bins=edges)
    fraud, _ = np.histogram(values[labels == 1], bins=edges)
    return pd.DataFrame({
        "bin_left": edges[:-1],
        "bin_right": edges[1:],
        "count_legit": legit.astype(np.int64),
        "count_fraud": fraud.astype(np.int64),
    })


def distribution_features(requested: Sequence[str], available: Sequence[str],
                          fallback: Sequence[str]) -> List[str]:
    """Requested features present in the data, else the first three fallback features."""
    present = [name for name in requested if name in available]
    return present or [name for name in fallback if name in available][:3]


def write_distributions(layout: ArtifactLayout, requested: Sequence[str], fallback: Sequence[str]) -> List[Path]:
    table, _ = read_container(require(layout.train_data, "prepare"))
    labels = table.labels()
    written = []
    for name in distribution_features(requested, table.feature_names, fallback):
        values = table.to_matrix([name])[:, 0]
        written.append(write_csv(class_histogram(values, labels), layout.root / f"distribution_{name}.csv"))
    return written


def _read_csv_records(path: Path) -> Optional[List[Dict[str, Any]]]:
    if not path.exists():
        return None
    return pd.read_csv(path).to_dict(orient="records")


def render_summary(console: Console, report: Dict[str, Any]) -> None:
    metrics = report["metrics"]
    training = report["training"]
    for part in ("test", "balanced_train"):
        scores = metrics[part]
        cls = scores["classification"]
        cm = scores["confusion"]
        console.print(Panel(
            f"accuracy {cls['accuracy']:.4f} | AUC-ROC {scores['auc_roc']:.4f} | AUC-PR {scores['auc_pr']:.4f}\n"
            f"fraud precision {cls['fraud']['precision']:.4f} recall {cls['fraud']['recall']:.4f} "
            f"f1 {cls['fraud']['f1']:.4f}\n"
            f"confusion tn={cm['tn']} fp={cm['fp']} fn={cm['fn']} tp={cm['tp']}",
            title=f"[bold cyan]{part}[/bold cyan]",
        ))
    if report["cv_auc"]:
        console.print(cv_table([row["auc"] for row in report["cv_auc"]]))
    if report["comparison"]:
        console.print(comparison_table(pd.DataFrame(report["comparison"])))
    console.print(f"[cyan]Decision threshold:[/cyan] {training['threshold']:.4f} ({training['threshold_policy']})")
    console.print(f"[cyan]Selected features:[/cyan] {', '.join(training['selected_features'][:10])}"
                  + (" ..." if len(training["selected_features"]) > 10 else ""))


def run_report(cfg: RunConfig, console: Optional[Console] = None) -> Dict[str, Any]:
    """Combine metrics, CV AUCs, comparison and training summary.

    Raises:
        StageError: Tagged ``report:<step>`` on any failure
    """
    layout = ArtifactLayout(cfg.output_dir)
    with stage("report:gather"):
        report = {
            "metrics": read_json(require(layout.metrics, "evaluate")),
            "training": read_json(require(layout.training_summary, "train")),
            "cv_auc": _read_csv_records(layout.cv_auc),
            "comparison": _read_csv_records(layout.comparison),
        }

    with stage("report:distributions"):
        written = write_distributions(layout, cfg.distribution_features, report["training"]["selected_features"])
        report["distribution_files"] = [path.name for path in written]

    with stage("report:write"):
        write_json(report, layout.report)
    logger.info(f"Report written to {layout.report}")

    if console is not None:
        render_summary(console, report)
    return report
