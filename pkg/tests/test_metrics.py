"""Tests for classification metrics and report output."""

import numpy as np
import pandas as pd
import pytest

from src.evaluation.metrics import (
    ConfusionMatrix,
    best_f1_threshold,
    confusion,
    evaluate,
    pr_curve,
    prf1,
    rank_auc,
    roc_auc,
)
from src.evaluation.reporting import comparison_frame, confusion_frame, pr_frame, roc_frame, write_csv, write_curves


def brute_force_auc(y, scores):
    pos = scores[y == 1]
    neg = scores[y == 0]
    wins = (pos[:, None] > neg[None, :]).sum() + 0.5 * (pos[:, None] == neg[None, :]).sum()
    return wins / (len(pos) * len(neg))


class TestConfusion:
    """Test cases for confusion counts and per-class scores."""

    @pytest.fixture
    def large_matrix(self):
        return ConfusionMatrix(tn=113453, fp=481, fn=1825, tp=112192)

    def test_fraud_recall_and_precision(self, large_matrix):
        scores = prf1(large_matrix)

        assert scores.positive.recall == pytest.approx(112192 / 114017)
        assert round(scores.positive.recall, 4) == 0.9840
        assert round(scores.positive.precision, 4) == 0.9957
        assert round(scores.accuracy, 4) == 0.9899
        assert scores.positive.support == 114017

    def test_perfect_predictions(self):
        y = np.array([0, 1, 1, 0, 1])
        cm = confusion(y, y)
        scores = prf1(cm)

        assert cm.fp == 0 and cm.fn == 0
        assert scores.accuracy == 1.0
        assert scores.per_class[0].f1 == 1.0 and scores.per_class[1].f1 == 1.0

    def test_inverted_predictions(self):
        y = np.array([0, 1, 1, 0])
        cm = confusion(y, 1 - y)
        assert cm.tp == 0 and cm.tn == 0

    def test_zero_denominator(self):
        scores = prf1(ConfusionMatrix(tn=5, fp=0, fn=3, tp=0))
        assert scores.positive.precision == 0.0
        assert scores.positive.f1 == 0.0

    def test_non_binary_labels(self):
        with pytest.raises(ValueError):
            confusion(np.array([0, 2]), np.array([0, 1]))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            confusion(np.array([0, 1]), np.array([0]))


class TestRankingCurves:
    """Test cases for ROC and precision-recall."""

    def test_perfect_ranking(self):
        assert rank_auc(np.array([0, 1]), np.array([0.2, 0.9])) == 1.0

    def test_all_tied(self):
        assert rank_auc(np.array([0, 1, 0, 1]), np.full(4, 0.3)) == 0.5

    def test_matches_pair_counting(self):
        gen = np.random.default_rng(8)
        y = gen.integers(0, 2, 200)
        scores = np.round(gen.random(200), 2)

        assert rank_auc(y, scores) == pytest.approx(brute_force_auc(y, scores), abs=1e-12)

    @pytest.mark.parametrize("seed", range(50))
    def test_random_cases_match_pair_counting(self, seed):
        gen = np.random.default_rng(seed)
        n = int(gen.integers(2, 1001))
        y = gen.integers(0, 2, n)
        y[:2] = [0, 1]
        scores = gen.random(n)
        if seed % 2:
            scores = np.round(scores, 1)

        assert rank_auc(y, scores) == pytest.approx(brute_force_auc(y, scores), abs=1e-12)

    @pytest.mark.parametrize("transform", [
        lambda s: np.exp(3.0 * s),
        lambda s: s ** 3 - 7.0,
        lambda s: np.log(s + 1e-3),
    ])
    def test_monotone_transform_keeps_auc(self, transform):
        gen = np.random.default_rng(12)
        y = gen.integers(0, 2, 300)
        scores = np.round(gen.random(300), 2)

        assert rank_auc(y, transform(scores)) == pytest.approx(rank_auc(y, scores), abs=1e-12)

    def test_curve_endpoints(self):
        gen = np.random.default_rng(1)
        y = gen.integers(0, 2, 50)
        curve, auc = roc_auc(y, gen.random(50))

        assert curve.points[0] == (0.0, 0.0)
        assert curve.points[-1] == (1.0, 1.0)
        assert curve.trapezoid_area() == pytest.approx(auc)

    def test_single_class(self):
        with pytest.raises(ValueError):
            rank_auc(np.zeros(4), np.arange(4.0))

    def test_pr_perfect(self):
        _, average_precision = pr_curve(np.array([0, 0, 1, 1]), np.array([0.1, 0.2, 0.8, 0.9]))
        assert average_precision == 1.0

    def test_pr_constant_scores(self):
        curve, _ = pr_curve(np.array([0, 1, 0, 0]), np.full(4, 0.5))
        assert curve.points == [(1.0, 0.25)]

    def test_pr_matches_per_threshold_recount(self):
        gen = np.random.default_rng(4)
        y = gen.integers(0, 2, 100)
        scores = np.round(gen.random(100), 1)
        curve, _ = pr_curve(y, scores)

        for threshold, recall, precision in zip(curve.thresholds, curve.recall, curve.precision):
            predicted = scores >= threshold
            tp = int(np.sum(predicted & (y == 1)))
            assert precision == tp / int(predicted.sum())
            assert recall == tp / int(y.sum())


class TestBestF1Threshold:
    """Test cases for threshold selection."""

    def test_small_example(self):
        threshold, f1 = best_f1_threshold(np.array([0, 0, 1, 1]), np.array([0.1, 0.4, 0.35, 0.8]))

        assert threshold == 0.35
        assert f1 == pytest.approx(0.8)

    def test_separated_scores(self):
        threshold, f1 = best_f1_threshold(np.array([0, 0, 1, 1]), np.array([0.1, 0.2, 0.6, 0.7]))

        assert threshold == 0.6
        assert f1 == 1.0

    @pytest.mark.parametrize("seed", range(100))
    def test_matches_exhaustive_rescan(self, seed):
        gen = np.random.default_rng(seed)
        n = int(gen.integers(2, 60))
        y = gen.integers(0, 2, n)
        y[0] = 1
        scores = np.round(gen.random(n), int(gen.integers(1, 4)))

        best_threshold, best_f1 = None, -1.0
        for t in sorted(set(scores.tolist()) | {1.0}):
            predicted = scores >= t
            tp = int(np.sum(predicted & (y == 1)))
            fp = int(np.sum(predicted & (y == 0)))
            fn = int(np.sum(~predicted & (y == 1)))
            f1 = 2 * tp / (2 * tp + fp + fn)
            if f1 > best_f1:
                best_threshold, best_f1 = t, f1

        threshold, f1 = best_f1_threshold(y, scores)
        assert threshold == best_threshold
        assert f1 == pytest.approx(best_f1, abs=1e-12)

    def test_no_positives(self):
        with pytest.raises(ValueError):
            best_f1_threshold(np.zeros(3), np.array([0.1, 0.2, 0.3]))


class TestEvaluate:
    """Test cases for evaluate and report writing."""

    @pytest.fixture
    def report(self):
        y = np.array([0, 0, 1, 1, 0, 1])
        scores = np.array([0.1, 0.6, 0.7, 0.4, 0.2, 0.9])
        return evaluate(scores, y, 0.5)

    def test_threshold_rule(self):
        report = evaluate(np.array([0.2, 0.5, 0.7]), np.array([0, 1, 1]), 0.5)
        assert report.confusion.to_dict() == {"tn": 1, "fp": 0, "fn": 0, "tp": 2}

    def test_lower_threshold_never_fewer_positives(self):
        gen = np.random.default_rng(0)
        scores = gen.random(100)
        y = gen.integers(0, 2, 100)
        counts = [
            evaluate(scores, y, t).confusion.tp + evaluate(scores, y, t).confusion.fp
            for t in (0.9, 0.7, 0.5, 0.3, 0.1)
        ]
        assert counts == sorted(counts)

    def test_to_dict(self, report):
        doc = report.to_dict()

        assert doc["threshold"] == 0.5
        assert set(doc["classification"]) == {"legit", "fraud", "accuracy", "macro_avg", "weighted_avg"}
        assert doc["roc_points"][0] == [0.0, 0.0]

    def test_curve_files(self, report, tmp_path):
        written = write_curves(report, tmp_path)
        names = sorted(path.name for path in written)

        assert names == ["confusion.csv", "pr.csv", "roc.csv"]
        roc = pd.read_csv(tmp_path / "roc.csv")
        assert list(roc.columns) == ["fpr", "tpr", "threshold"]

    def test_frames(self, report):
        assert len(roc_frame(report)) == len(report.roc.fpr)
        assert len(pr_frame(report)) == len(report.pr.recall)
        assert confusion_frame(report)["count"].sum() == 6

    def test_comparison_frame(self, report):
        frame = comparison_frame({"stacking": report, "base1": report})

        assert frame["model"].tolist() == ["stacking", "base1"]
        assert frame.loc[0, "auc_roc"] == pytest.approx(report.auc_roc)

    def test_write_csv_is_stable(self, report, tmp_path):
        first = write_csv(roc_frame(report), tmp_path / "a.csv").read_bytes()
        second = write_csv(roc_frame(report), tmp_path / "b.csv").read_bytes()
        assert first == second
