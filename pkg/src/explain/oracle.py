"""Exact Shapley values by subset enumeration, used to check TreeSHAP."""

import math
from typing import List, Optional

import numpy as np

from src.explain.tree_shap import ShapValues
from src.gbdt.model import GBDTModel
from src.gbdt.tree import FlatTree

MAX_ORACLE_FEATURES = 12


def _background_covers(tree: FlatTree, background: np.ndarray) -> np.ndarray:
    """Number of ``background`` rows reaching each node."""
    counts = np.zeros(tree.n_nodes)
    node = np.zeros(len(background), dtype=np.int64)
    rows = np.arange(len(background))
    np.add.at(counts, node, 1.0)
    for _ in range(tree.max_depth):
        internal = tree.feature[node] >= 0
        if not internal.any():
            break
        active = rows[internal]
        at = node[active]
        go_left = background[active, tree.feature[at]] <= tree.threshold[at]
        node[active] = np.where(go_left, tree.left[at], tree.right[at])
        np.add.at(counts, node[active], 1.0)
    return counts


def _conditional_expectation(tree: FlatTree, weights: np.ndarray, subset: frozenset, x: np.ndarray) -> float:
    def visit(node: int) -> float:
        if tree.feature[node] < 0:
            return float(tree.value[node])
        left, right = int(tree.left[node]), int(tree.right[node])
        feature = int(tree.feature[node])
        if feature in subset:
            return visit(left) if x[feature] <= tree.threshold[node] else visit(right)
        w_left, w_right = weights[left], weights[right]
        if w_left + w_right <= 0:
            w_left, w_right = tree.cover[left], tree.cover[right]
        return (visit(left) * w_left + visit(right) * w_right) / (w_left + w_right)

    return visit(0)


def exact_shapley_oracle(model: GBDTModel, x: np.ndarray,
                         background: Optional[np.ndarray] = None) -> ShapValues:
    """Shapley values of the cover-weighted conditional expectation game.

    ``v(S)`` walks each tree, following ``x`` at splits on features in S and
    averaging both children by node weight otherwise. Node weights are the
    model covers, or counts of ``background`` rows when given (nodes the
    background never reaches fall back to model covers).

    Args:
        model: Tree ensemble with at most 12 features
        x: Row to explain
        background: Optional rows used to re-weight nodes

    Returns:
        ShapValues with ``base_value = v(empty set)``

    Raises:
        ValueError: If the model has more than 12 features or the width differs
    """
    n = model.n_features
    if n > MAX_ORACLE_FEATURES:
        raise ValueError(f"oracle enumerates 2^n subsets; {n} features exceeds {MAX_ORACLE_FEATURES}")
    x = np.asarray(x, dtype=np.float64).ravel()
    if len(x) != n:
        raise ValueError(f"row width {len(x)} does not match the model's {n} features")

    trees: List[FlatTree] = list(model.flat_trees)
    if background is None:
        node_weights = [tree.cover for tree in trees]
    else:
        background = np.asarray(background, dtype=np.float64)
        node_weights = [_background_covers(tree, background) for tree in trees]

    values = np.empty(1 << n)
    for mask in range(1 << n):
        subset = frozenset(j for j in range(n) if mask >> j & 1)
        values[mask] = model.base_score + sum(
            _conditional_expectation(tree, weights, subset, x)
            for tree, weights in zip(trees, node_weights)
        )

    factorial = [math.factorial(k) for k in range(n + 1)]
    phi = np.zeros(n)
    for i in range(n):
        bit = 1 << i
        for mask in range(1 << n):
            if mask & bit:
                continue
            size = bin(mask).count("1")
            weight = factorial[size] * factorial[n - size - 1] / factorial[n]
            phi[i] += weight * (values[mask | bit] - values[mask])
    return ShapValues(phi, float(values[0]), model.feature_names)
