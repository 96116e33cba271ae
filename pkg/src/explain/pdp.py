"""Partial dependence on quantile grids."""

from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
import pandas as pd

ProbaFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class PDPCurve:
    feature: str
    grid: np.ndarray
    mean_prediction: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"grid_value": self.grid, "mean_proba": self.mean_prediction})


def quantile_grid(values: np.ndarray, n_grid: int) -> np.ndarray:
    """Strictly increasing quantiles at levels i / (n_grid - 1); one point for a constant column."""
    if n_grid < 2:
        raise ValueError(f"n_grid must be at least 2, got {n_grid}")
    levels = np.arange(n_grid) / (n_grid - 1)
    return np.unique(np.quantile(values, levels))


def pdp(predict_proba: ProbaFn, X: np.ndarray, feature: Union[int, str], n_grid: int = 20,
        feature_names: Sequence[str] = ()) -> PDPCurve:
    """Mean predicted probability as one feature is set to each grid value for every row.

    Args:
        predict_proba: Maps an (n, d) matrix to fraud probabilities
        X: Rows to average over
        feature: Column index or name
        n_grid: Requested grid points
        feature_names: Column names, needed when ``feature`` is a name

    Returns:
        PDPCurve

    Raises:
        ValueError: If the feature does not exist
    """
    X = np.asarray(X, dtype=np.float64)
    names = list(feature_names)
    if isinstance(feature, str):
        if feature not in names:
            raise ValueError(f"unknown feature {feature!r}")
        index = names.index(feature)
    else:
        index = int(feature)
        if not 0 <= index < X.shape[1]:
            raise ValueError(f"feature index {index} outside 0..{X.shape[1] - 1}")
    label = names[index] if names else f"f{index}"

    grid = quantile_grid(X[:, index], n_grid)
    means = np.empty(len(grid))
    modified = X.copy()
    for i, value in enumerate(grid):
        modified[:, index] = value
        means[i] = float(np.mean(predict_proba(modified)))
    return PDPCurve(label, grid, means)
