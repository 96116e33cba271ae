"""Binary classification metrics."""

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np


@dataclass(frozen=True)
class ConfusionMatrix:
    tn: int
    fp: int
    fn: int
    tp: int

    @property
    def total(self) -> int:
        return self.tn + self.fp + self.fn + self.tp

    def to_dict(self) -> Dict[str, int]:
        return {"tn": self.tn, "fp": self.fp, "fn": self.fn, "tp": self.tp}


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int

    def to_dict(self) -> Dict[str, float]:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1, "support": self.support}


@dataclass(frozen=True)
class PRF1:
    """Per-class scores (index 0 = legitimate, 1 = fraud) plus averages."""

    per_class: Tuple[ClassMetrics, ClassMetrics]
    accuracy: float
    macro: ClassMetrics
    weighted: ClassMetrics

    @property
    def positive(self) -> ClassMetrics:
        return self.per_class[1]

    def to_dict(self) -> Dict[str, object]:
        return {
            "legit": self.per_class[0].to_dict(),
            "fraud": self.per_class[1].to_dict(),
            "accuracy": self.accuracy,
            "macro_avg": self.macro.to_dict(),
            "weighted_avg": self.weighted.to_dict(),
        }


def _ratio(numerator: float, denominator: float) -> float:
    return numerator / denominator if denominator > 0 else 0.0


def _harmonic(precision: float, recall: float) -> float:
    return _ratio(2 * precision * recall, precision + recall)


def _binary(values: np.ndarray, name: str) -> np.ndarray:
    values = np.asarray(values)
    if values.size and not np.isin(values, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0/1 labels")
    return values.astype(np.int64)


def confusion(y: np.ndarray, yhat: np.ndarray) -> ConfusionMatrix:
    """Counts of (actual, predicted) pairs.

    Raises:
        ValueError: On a length mismatch
    """
    y = _binary(y, "y")
    yhat = _binary(yhat, "yhat")
    if len(y) != len(yhat):
        raise ValueError(f"length mismatch: {len(y)} labels vs {len(yhat)} predictions")
    tp = int(np.sum((y == 1) & (yhat == 1)))
    fp = int(np.sum((y == 0) & (yhat == 1)))
    fn = int(np.sum((y == 1) & (yhat == 0)))
    return ConfusionMatrix(tn=len(y) - tp - fp - fn, fp=fp, fn=fn, tp=tp)


def prf1(cm: ConfusionMatrix) -> PRF1:
    """Precision, recall and F1 per class; zero denominators give 0."""
    pos_p = _ratio(cm.tp, cm.tp + cm.fp)
    pos_r = _ratio(cm.tp, cm.tp + cm.fn)
    neg_p = _ratio(cm.tn, cm.tn + cm.fn)
    neg_r = _ratio(cm.tn, cm.tn + cm.fp)
    positive = ClassMetrics(pos_p, pos_r, _harmonic(pos_p, pos_r), cm.tp + cm.fn)
    negative = ClassMetrics(neg_p, neg_r, _harmonic(neg_p, neg_r), cm.tn + cm.fp)

    classes = (negative, positive)
    macro = ClassMetrics(
        sum(c.precision for c in classes) / 2,
        sum(c.recall for c in classes) / 2,
        sum(c.f1 for c in classes) / 2,
        cm.total,
    )
    weighted = ClassMetrics(
        _ratio(sum(c.precision * c.support for c in classes), cm.total),
        _ratio(sum(c.recall * c.support for c in classes), cm.total),
        _ratio(sum(c.f1 * c.support for c in classes), cm.total),
        cm.total,
    )
    return PRF1(classes, _ratio(cm.tp + cm.tn, cm.total), macro, weighted)


def _sweep(y: np.ndarray, scores: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cumulative (tp, fp) at each unique score, thresholds descending."""
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_y = y[order]
    # Last index of each run of equal scores.
    boundaries = np.flatnonzero(np.diff(sorted_scores)) if len(scores) > 1 else np.empty(0, dtype=np.int64)
    ends = np.append(boundaries, len(scores) - 1)
    tp = np.cumsum(sorted_y)[ends]
    fp = (ends + 1) - tp
    return sorted_scores[ends], tp.astype(np.int64), fp.astype(np.int64)


def _scores(scores: np.ndarray, n: int) -> np.ndarray:
    scores = np.asarray(scores, dtype=np.float64)
    if len(scores) != n:
        raise ValueError(f"length mismatch: {n} labels vs {len(scores)} scores")
    return scores


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray

    @property
    def points(self) -> List[Tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))

    def trapezoid_area(self) -> float:
        return float(np.sum(np.diff(self.fpr) * (self.tpr[1:] + self.tpr[:-1]) / 2))


def rank_auc(y: np.ndarray, scores: np.ndarray) -> float:
    """Mann-Whitney statistic: (concordant + tied / 2) / (n_pos * n_neg).

    Raises:
        ValueError: If y holds a single class
    """
    y = _binary(y, "y")
    scores = _scores(scores, len(y))
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC is undefined when y contains a single class")
    _, tp, fp = _sweep(y, scores)
    pos_at = np.diff(np.concatenate([[0], tp]))
    neg_at = np.diff(np.concatenate([[0], fp]))
    neg_above = np.concatenate([[0], fp[:-1]])
    # Positives at a score beat every negative strictly below it.
    neg_below = n_neg - neg_above - neg_at
    concordant = int(np.dot(pos_at, neg_below))
    tied = int(np.dot(pos_at, neg_at))
    return (concordant + 0.5 * tied) / (n_pos * n_neg)


def roc_auc(y: np.ndarray, scores: np.ndarray) -> Tuple[RocCurve, float]:
    """ROC curve over all unique thresholds plus the rank-statistic AUC.

    The curve starts at (0, 0) with threshold +inf and ends at (1, 1).
    """
    y = _binary(y, "y")
    scores = _scores(scores, len(y))
    auc = rank_auc(y, scores)
    thresholds, tp, fp = _sweep(y, scores)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    curve = RocCurve(
        fpr=np.concatenate([[0.0], fp / n_neg]),
        tpr=np.concatenate([[0.0], tp / n_pos]),
        thresholds=np.concatenate([[np.inf], thresholds]),
    )
    return curve, auc


@dataclass(frozen=True)
class PrCurve:
    recall: np.ndarray
    precision: np.ndarray
    thresholds: np.ndarray

    @property
    def points(self) -> List[Tuple[float, float]]:
        return list(zip(self.recall.tolist(), self.precision.tolist()))


def pr_curve(y: np.ndarray, scores: np.ndarray) -> Tuple[PrCurve, float]:
    """Precision/recall at every unique threshold (descending) and step-wise average precision.

    Raises:
        ValueError: If y has no positives
    """
    y = _binary(y, "y")
    scores = _scores(scores, len(y))
    n_pos = int(y.sum())
    if n_pos == 0:
        raise ValueError("precision-recall curve needs at least one positive")
    thresholds, tp, fp = _sweep(y, scores)
    precision = tp / (tp + fp)
    recall = tp / n_pos
    average_precision = float(np.sum(np.diff(np.concatenate([[0.0], recall])) * precision))
    return PrCurve(recall, precision, thresholds), average_precision


def f1_from_counts(tp: np.ndarray, fp: np.ndarray, fn: np.ndarray) -> np.ndarray:
    """F1 = 2tp / (2tp + fp + fn), 0 where undefined."""
    tp = np.asarray(tp, dtype=np.float64)
    denominator = 2 * tp + fp + fn
    return np.divide(2 * tp, denominator, out=np.zeros_like(tp), where=denominator > 0)


def best_f1_threshold(y: np.ndarray, scores: np.ndarray) -> Tuple[float, float]:
    """Threshold maximising positive-class F1 under ``score >= t``.

    Candidates are the unique scores plus 1.0 (when every score is below it);
    ties go to the lowest threshold.

    Raises:
        ValueError: If y has no positives
    """
    y = _binary(y, "y")
    scores = _scores(scores, len(y))
    n_pos = int(y.sum())
    if n_pos == 0:
        raise ValueError("best F1 threshold needs at least one positive")
    thresholds, tp, fp = _sweep(y, scores)
    f1 = f1_from_counts(tp, fp, n_pos - tp)
    if thresholds[0] < 1.0:
        # Endpoint above every score: nothing predicted positive.
        thresholds = np.concatenate([[1.0], thresholds])
        f1 = np.concatenate([[0.0], f1])
    # Thresholds descend, so the last maximum is the lowest threshold.
    best = len(f1) - 1 - int(np.argmax(f1[::-1]))
    return float(thresholds[best]), float(f1[best])


@dataclass(frozen=True)
class EvalReport:
    """Everything reported for one scored dataset."""

    confusion: ConfusionMatrix
    scores: PRF1
    roc: RocCurve
    pr: PrCurve
    auc_roc: float
    auc_pr: float
    threshold_used: float
    extras: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, object]:
        return {
            "threshold": self.threshold_used,
            "confusion": self.confusion.to_dict(),
            "classification": self.scores.to_dict(),
            "auc_roc": self.auc_roc,
            "auc_pr": self.auc_pr,
            "roc_points": [[f, t] for f, t in self.roc.points],
            "pr_points": [[r, p] for r, p in self.pr.points],
            **self.extras,
        }


def evaluate(scores: np.ndarray, y: np.ndarray, threshold: float) -> EvalReport:
    """Confusion matrix, per-class scores and ranking curves for ``score >= threshold``."""
    scores = np.asarray(scores, dtype=np.float64)
    yhat = (scores >= threshold).astype(np.int64)
    cm = confusion(y, yhat)
    roc, auc = roc_auc(y, scores)
    pr, ap = pr_curve(y, scores)
    return EvalReport(cm, prf1(cm), roc, pr, auc, ap, float(threshold))
