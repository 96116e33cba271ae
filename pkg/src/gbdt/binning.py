"""Quantile binning of feature columns."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np


def feature_edges(column: np.ndarray, n_bins: int) -> np.ndarray:
    """Ascending bin upper edges for one column.

    Columns with at most ``n_bins`` distinct values get one bin per value, so
    histogram splits coincide with exact splits. Otherwise edges are training
    quantiles; every edge is an observed value and the last edge is the maximum.
    """
    distinct = np.unique(column)
    if len(distinct) <= n_bins:
        return distinct
    levels = np.arange(1, n_bins + 1) / n_bins
    return np.unique(np.quantile(column, levels, method="lower"))


@dataclass(frozen=True)
class BinMapper:
    """Per-feature edges; value x falls in the first bin whose edge is >= x."""

    edges: Tuple[np.ndarray, ...]

    @classmethod
    def fit(cls, X: np.ndarray, n_bins: int) -> "BinMapper":
        return cls(tuple(feature_edges(X[:, j], n_bins) for j in range(X.shape[1])))

    @property
    def n_bins(self) -> np.ndarray:
        return np.array([len(e) for e in self.edges], dtype=np.int64)

    def transform(self, X: np.ndarray) -> np.ndarray:
        """Bin indices; values above the last edge go to the last bin."""
        out = np.empty(X.shape, dtype=np.int32)
        for j, edges in enumerate(self.edges):
            out[:, j] = np.minimum(np.searchsorted(edges, X[:, j], side="left"), len(edges) - 1)
        return out

    def threshold(self, feature: int, bin_index: int) -> float:
        """Split value for ``bin <= bin_index``: rows with ``x <= threshold`` go left."""
        return float(self.edges[feature][bin_index])
