"""Plot-ready CSV/JSON artifacts and rich console tables for evaluation results."""

from pathlib import Path
from typing import Dict, List, Mapping, Sequence

import pandas as pd
from rich.console import Console
from rich.table import Table

from src.evaluation.metrics import EvalReport

COMPARISON_COLUMNS = ("model", "accuracy", "auc_roc", "auc_pr", "f1_pos")


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    """Deterministic CSV: no index, LF endings, round-trip float formatting."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n", float_format="%.17g")
    return path


def roc_frame(report: EvalReport) -> pd.DataFrame:
    return pd.DataFrame({"fpr": report.roc.fpr, "tpr": report.roc.tpr, "threshold": report.roc.thresholds})


def pr_frame(report: EvalReport) -> pd.DataFrame:
    return pd.DataFrame({"recall": report.pr.recall, "precision": report.pr.precision,
                         "threshold": report.pr.thresholds})


def confusion_frame(report: EvalReport) -> pd.DataFrame:
    cm = report.confusion
    return pd.DataFrame({
        "actual": [0, 0, 1, 1],
        "predicted": [0, 1, 0, 1],
        "count": [cm.tn, cm.fp, cm.fn, cm.tp],
    })


def write_curves(report: EvalReport, out_dir: Path, prefix: str = "") -> List[Path]:
    """``roc.csv``, ``pr.csv`` and ``confusion.csv`` (with an optional name prefix)."""
    out_dir = Path(out_dir)
    return [
        write_csv(roc_frame(report), out_dir / f"{prefix}roc.csv"),
        write_csv(pr_frame(report), out_dir / f"{prefix}pr.csv"),
        write_csv(confusion_frame(report), out_dir / f"{prefix}confusion.csv"),
    ]


def comparison_row(name: str, report: EvalReport) -> Dict[str, object]:
    return {
        "model": name,
        "accuracy": report.scores.accuracy,
        "auc_roc": report.auc_roc,
        "auc_pr": report.auc_pr,
        "f1_pos": report.scores.positive.f1,
    }


def comparison_frame(reports: Mapping[str, EvalReport]) -> pd.DataFrame:
    """One row per model in insertion order."""
    return pd.DataFrame([comparison_row(name, r) for name, r in reports.items()], columns=list(COMPARISON_COLUMNS))


def classification_table(report: EvalReport, title: str) -> Table:
    table = Table(title=title, show_header=True, header_style="bold magenta")
    table.add_column("Class", style="cyan")
    for column in ("Precision", "Recall", "F1", "Support"):
        table.add_column(column, justify="right", style="green")
    rows = [
        ("legit", report.scores.per_class[0]),
        ("fraud", report.scores.per_class[1]),
        ("macro avg", report.scores.macro),
        ("weighted avg", report.scores.weighted),
    ]
    for label, m in rows:
        table.add_row(label, f"{m.precision:.4f}", f"{m.recall:.4f}", f"{m.f1:.4f}", str(m.support))
    table.caption = (
        f"accuracy {report.scores.accuracy:.4f} | AUC-ROC {report.auc_roc:.4f} | "
        f"AUC-PR {report.auc_pr:.4f} | threshold {report.threshold_used:.4f}"
    )
    return table


def confusion_table(report: EvalReport, title: str) -> Table:
    cm = report.confusion
    table = Table(title=title, show_header=True, header_style="bold magenta")
    table.add_column("Actual \\ Predicted", style="cyan")
    table.add_column("legit", justify="right")
    table.add_column("fraud", justify="right")
    table.add_row("legit", str(cm.tn), f"[red]{cm.fp}[/red]")
    table.add_row("fraud", f"[red]{cm.fn}[/red]", str(cm.tp))
    return table


def comparison_table(frame: pd.DataFrame) -> Table:
    table = Table(title="Model comparison (test set)", show_header=True, header_style="bold magenta")
    table.add_column("Model", style="cyan")
    for column in COMPARISON_COLUMNS[1:]:
        table.add_column(column, justify="right", style="green")
    for row in frame.itertuples(index=False):
        table.add_row(str(row.model), *(f"{getattr(row, c):.4f}" for c in COMPARISON_COLUMNS[1:]))
    return table


def cv_table(fold_aucs: Sequence[float]) -> Table:
    table = Table(title="Cross-validation AUC", show_header=True, header_style="bold magenta")
    table.add_column("Fold", style="cyan")
    table.add_column("AUC", justify="right", style="green")
    for fold, auc in enumerate(fold_aucs):
        table.add_row(str(fold), f"{auc:.4f}")
    if fold_aucs:
        table.caption = f"mean {sum(fold_aucs) / len(fold_aucs):.4f} | spread {max(fold_aucs) - min(fold_aucs):.4f}"
    return table


def render_report(console: Console, report: EvalReport, label: str) -> None:
    console.print(classification_table(report, f"Classification report ({label})"))
    console.print(confusion_table(report, f"Confusion matrix ({label})"))
