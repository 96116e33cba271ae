"""Regression tree nodes and their flat array form."""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np


@dataclass(frozen=True)
class TreeNode:
    """A leaf (``feature == -1``) or an internal split node.

    Rows with ``x[feature] <= threshold`` go to ``left``. ``cover`` is the sum
    of training hessians that reached the node.
    """

    cover: float
    value: float = 0.0
    feature: int = -1
    threshold: float = 0.0
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0

    @classmethod
    def leaf(cls, value: float, cover: float) -> "TreeNode":
        return cls(cover=cover, value=value)

    @classmethod
    def split(cls, feature: int, threshold: float, left: "TreeNode", right: "TreeNode") -> "TreeNode":
        """Internal node whose cover is the sum of its children's covers."""
        return cls(cover=left.cover + right.cover, feature=feature, threshold=threshold, left=left, right=right)

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())

    def n_leaves(self) -> int:
        if self.is_leaf:
            return 1
        return self.left.n_leaves() + self.right.n_leaves()


@dataclass(frozen=True)
class FlatTree:
    """Pre-order array layout of a tree; leaves have ``feature == -1`` and children -1."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    cover: np.ndarray
    max_depth: int

    @classmethod
    def from_node(cls, root: TreeNode) -> "FlatTree":
        feature: List[int] = []
        threshold: List[float] = []
        left: List[int] = []
        right: List[int] = []
        value: List[float] = []
        cover: List[float] = []

        def visit(node: TreeNode) -> int:
            index = len(feature)
            feature.append(node.feature)
            threshold.append(node.threshold)
            left.append(-1)
            right.append(-1)
            value.append(node.value)
            cover.append(node.cover)
            if not node.is_leaf:
                left[index] = visit(node.left)
                right[index] = visit(node.right)
            return index

        visit(root)
        arrays = [
            np.array(feature, dtype=np.int64),
            np.array(threshold, dtype=np.float64),
            np.array(left, dtype=np.int64),
            np.array(right, dtype=np.int64),
            np.array(value, dtype=np.float64),
            np.array(cover, dtype=np.float64),
        ]
        for array in arrays:
            array.setflags(write=False)
        return cls(*arrays, max_depth=root.depth())

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf node index reached by every row of X."""
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        for _ in range(self.max_depth):
            internal = self.feature[node] >= 0
            if not internal.any():
                break
            active = rows[internal]
            at = node[active]
            go_left = X[active, self.feature[at]] <= self.threshold[at]
            node[active] = np.where(go_left, self.left[at], self.right[at])
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def expected_value(self) -> float:
        """Cover-weighted mean leaf value."""
        leaves = self.feature < 0
        return float(np.dot(self.value[leaves], self.cover[leaves]) / self.cover[0])

    def used_features(self) -> np.ndarray:
        return np.unique(self.feature[self.feature >= 0])
