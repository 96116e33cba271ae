"""Trained boosted tree ensemble."""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Tuple, Union

import numpy as np

from src.gbdt.config import GBDTConfig, Growth
from src.gbdt.loss import sigmoid
from src.gbdt.tree import FlatTree, TreeNode


@dataclass(frozen=True)
class GBDTModel:
    """Additive ensemble: margin = base_score + sum of per-tree leaf values."""

    trees: Tuple[TreeNode, ...]
    base_score: float
    config: GBDTConfig = field(default_factory=GBDTConfig)
    feature_names: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "trees", tuple(self.trees))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def growth(self) -> Growth:
        return self.config.growth

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    @cached_property
    def flat_trees(self) -> Tuple[FlatTree, ...]:
        return tuple(FlatTree.from_node(tree) for tree in self.trees)

    def _as_matrix(self, X: Union[np.ndarray, Sequence[float]]) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(
                f"row width {X.shape[-1]} does not match the model's {self.n_features} features"
            )
        return X

    def tree_values(self, X: np.ndarray) -> np.ndarray:
        """(n_rows, n_trees) matrix of leaf values."""
        X = self._as_matrix(X)
        out = np.zeros((len(X), len(self.trees)))
        for t, tree in enumerate(self.flat_trees):
            out[:, t] = tree.predict(X)
        return out

    def predict_margin(self, X: np.ndarray) -> Union[float, np.ndarray]:
        """Log-odds for a row (returns float) or a matrix (returns array).

        Raises:
            ValueError: If the row width differs from the feature count
        """
        single = np.ndim(X) == 1
        matrix = self._as_matrix(X)
        margin = np.full(len(matrix), self.base_score)
        for tree in self.flat_trees:
            margin += tree.predict(matrix)
        return float(margin[0]) if single else margin

    def predict_proba(self, X: np.ndarray) -> Union[float, np.ndarray]:
        """Positive-class probability, sigmoid of the margin."""
        margin = self.predict_margin(X)
        proba = sigmoid(np.asarray(margin))
        return float(proba) if np.ndim(margin) == 0 else proba

    def expected_margin(self) -> float:
        """Base score plus the cover-weighted expectation of every tree."""
        return self.base_score + sum(tree.expected_value() for tree in self.flat_trees)

    def used_features(self) -> np.ndarray:
        """Indices of features referenced by any split."""
        if not self.trees:
            return np.empty(0, dtype=np.int64)
        return np.unique(np.concatenate([tree.used_features() for tree in self.flat_trees]))

    def truncated(self, n_trees: int) -> "GBDTModel":
        """Copy keeping only the first ``n_trees`` trees."""
        return GBDTModel(self.trees[:n_trees], self.base_score, self.config, self.feature_names)
