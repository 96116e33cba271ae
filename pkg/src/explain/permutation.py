"""Permutation feature importance."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.evaluation.metrics import confusion, prf1, rank_auc

ProbaFn = Callable[[np.ndarray], np.ndarray]
METRICS = ("auc", "f1")


@dataclass(frozen=True)
class PfiResult:
    feature_names: Tuple[str, ...]
    mean_drop: np.ndarray
    std_drop: np.ndarray
    baseline: float
    metric: str

    def ranking(self) -> pd.DataFrame:
        """``feature, mean_drop, std`` sorted by descending drop."""
        frame = pd.DataFrame({
            "feature": list(self.feature_names),
            "mean_drop": self.mean_drop,
            "std": self.std_drop,
        })
        return frame.sort_values("mean_drop", ascending=False, kind="stable").reset_index(drop=True)


def _scorer(metric: str, threshold: float) -> Callable[[np.ndarray, np.ndarray], float]:
    if metric == "auc":
        return rank_auc
    if metric == "f1":
        return lambda y, scores: prf1(confusion(y, (scores >= threshold).astype(np.int64))).positive.f1
    raise ValueError(f"metric must be one of {METRICS}, got {metric!r}")


def permutation_importance(
    predict_proba: ProbaFn,
    X: np.ndarray,
    y: np.ndarray,
    metric: str = "auc",
    n_repeats: int = 5,
    seed: int = 0,
    feature_names: Sequence[str] = (),
    threshold: float = 0.5,
    max_workers: Optional[int] = None,
) -> PfiResult:
    """Score drop when each column is shuffled.

    Each feature shuffles with its own generator seeded from (seed, feature),
    so results do not depend on the order features are processed. Negative
    drops are kept as they are.

    Args:
        predict_proba: Maps an (n, d) matrix to fraud probabilities
        X: Evaluation rows
        y: Labels
        metric: ``auc`` or ``f1``
        n_repeats: Shuffles per feature
        seed: Random seed
        feature_names: Column names
        threshold: Decision threshold for ``f1``
        max_workers: Threads over features

    Returns:
        PfiResult

    Raises:
        ValueError: With fewer than 2 rows or a single class
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if len(X) < 2 or len(np.unique(y)) < 2:
        raise ValueError("permutation importance needs at least 2 rows and both classes")
    score = _scorer(metric, threshold)
    n_features = X.shape[1]
    names = tuple(feature_names) if feature_names else tuple(f"f{j}" for j in range(n_features))
    baseline = score(y, np.asarray(predict_proba(X)))

    def drops_for(j: int) -> np.ndarray:
        rng = np.random.default_rng([seed, j])
        shuffled = X.copy()
        out = np.empty(n_repeats)
        for r in range(n_repeats):
            shuffled[:, j] = X[rng.permutation(len(X)), j]
            out[r] = baseline - score(y, np.asarray(predict_proba(shuffled)))
        return out

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            drops = list(executor.map(drops_for, range(n_features)))
    else:
        drops = [drops_for(j) for j in range(n_features)]
    matrix = np.vstack(drops) if drops else np.empty((0, n_repeats))
    return PfiResult(names, matrix.mean(axis=1), matrix.std(axis=1), float(baseline), metric)
