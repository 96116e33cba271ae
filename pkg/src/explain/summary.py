"""Global SHAP ranking and SHAP-driven feature selection."""

from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.explain.tree_shap import shap_matrix
from src.gbdt.model import GBDTModel

Ranking = List[Tuple[str, float]]


def rank_by_mean_abs(phi: np.ndarray, feature_names: Sequence[str]) -> Ranking:
    """Features by descending mean |phi|; ties keep feature order."""
    scores = np.abs(phi).mean(axis=0) if len(phi) else np.zeros(len(feature_names))
    order = sorted(range(len(feature_names)), key=lambda j: (-scores[j], j))
    return [(feature_names[j], float(scores[j])) for j in order]


def shap_summary(model: GBDTModel, X: np.ndarray, max_workers: Optional[int] = None) -> Ranking:
    """Rank the model's features by mean absolute TreeSHAP value over X."""
    phi, _ = shap_matrix(model, X, max_workers=max_workers)
    return rank_by_mean_abs(phi, model.feature_names)


def select_top_k(ranking: Ranking, k: int = 30) -> List[str]:
    """Names of the first k ranked features.

    Raises:
        ValueError: If k is not in [1, number of features]
    """
    if not 1 <= k <= len(ranking):
        raise ValueError(f"k={k} must be between 1 and the feature count {len(ranking)}")
    return [name for name, _ in ranking[:k]]


def summary_frame(ranking: Ranking) -> pd.DataFrame:
    """``feature, mean_abs_shap, rank`` table (rank starts at 1)."""
    return pd.DataFrame({
        "feature": [name for name, _ in ranking],
        "mean_abs_shap": [score for _, score in ranking],
        "rank": np.arange(1, len(ranking) + 1),
    })


def shap_distribution(phi: np.ndarray, X: np.ndarray, feature_names: Sequence[str]) -> pd.DataFrame:
    """Per-feature spread of attributions and their correlation with the feature value.

    A positive ``value_correlation`` means larger feature values push the
    prediction toward fraud. Constant columns report 0.
    """
    records = []
    for j, name in enumerate(feature_names):
        column, values = phi[:, j], X[:, j]
        if len(column) > 1 and column.std() > 0 and values.std() > 0:
            correlation = float(np.corrcoef(values, column)[0, 1])
        else:
            correlation = 0.0
        records.append({
            "feature": name,
            "mean_abs_shap": float(np.abs(column).mean()) if len(column) else 0.0,
            "mean": float(column.mean()) if len(column) else 0.0,
            "std": float(column.std()) if len(column) else 0.0,
            "min": float(column.min()) if len(column) else 0.0,
            "max": float(column.max()) if len(column) else 0.0,
            "value_correlation": correlation,
        })
    frame = pd.DataFrame.from_records(records)
    return frame.sort_values("mean_abs_shap", ascending=False, kind="stable").reset_index(drop=True)
