"""Path-dependent TreeSHAP, vectorised over rows.

For every leaf the root-to-leaf path is reduced to its distinct features. A
feature's "zero fraction" is the product of cover ratios of the edges on the
path that test it, and its "one fraction" is 1 when the row follows all of
those edges. The leaf then contributes the Shapley value of the game
``v(S) = leaf * prod_{j in S} one_j * prod_{j not in S} zero_j`` which the
extend/unwind polynomial recurrences evaluate in quadratic time.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.gbdt.model import GBDTModel
from src.gbdt.tree import FlatTree


@dataclass(frozen=True)
class ShapValues:
    """Attributions for one prediction, in log-odds units."""

    phi: np.ndarray
    base_value: float
    feature_names: Tuple[str, ...]

    @property
    def prediction(self) -> float:
        return float(self.base_value + self.phi.sum())

    def to_dict(self) -> dict:
        return {
            "base_value": self.base_value,
            "prediction_margin": self.prediction,
            "phi": {name: float(v) for name, v in zip(self.feature_names, self.phi)},
        }


@dataclass(frozen=True)
class _LeafPath:
    value: float
    features: np.ndarray
    zero: np.ndarray
    # (feature index in path, node, goes_left) for each edge, grouped by path position
    edges: Tuple[Tuple[int, int, bool], ...]


def _leaf_paths(tree: FlatTree) -> List[_LeafPath]:
    paths: List[_LeafPath] = []

    def walk(node: int, trail: List[Tuple[int, bool]]) -> None:
        if tree.feature[node] < 0:
            order: Dict[int, int] = {}
            zero: List[float] = []
            edges = []
            for parent, goes_left in trail:
                feature = int(tree.feature[parent])
                child = tree.left[parent] if goes_left else tree.right[parent]
                ratio = tree.cover[child] / tree.cover[parent]
                if feature not in order:
                    order[feature] = len(zero)
                    zero.append(1.0)
                zero[order[feature]] *= ratio
                edges.append((order[feature], parent, goes_left))
            paths.append(_LeafPath(
                float(tree.value[node]),
                np.array(list(order), dtype=np.int64),
                np.array(zero),
                tuple(edges),
            ))
            return
        walk(int(tree.left[node]), trail + [(node, True)])
        walk(int(tree.right[node]), trail + [(node, False)])

    walk(0, [])
    return paths


def _extend(weights: List[np.ndarray], zero: float, one: np.ndarray) -> List[np.ndarray]:
    """Add one player to the permutation-weight polynomial."""
    depth = len(weights)
    out = [w * zero * (depth - i) / (depth + 1) for i, w in enumerate(weights)]
    out.append(np.zeros_like(one))
    for i, w in enumerate(weights):
        out[i + 1] = out[i + 1] + one * w * (i + 1) / (depth + 1)
    return out


def _unwound_sum(weights: List[np.ndarray], zero: float, one: np.ndarray) -> np.ndarray:
    """Total weight of the polynomial with one player removed.

    ``one`` is a 0/1 vector; both branches are evaluated and selected per row.
    """
    depth = len(weights) - 1
    total_one = np.zeros_like(one)
    total_zero = np.zeros_like(one)
    next_one = weights[depth]
    safe_one = np.where(one != 0, one, 1.0)
    for j in range(depth - 1, -1, -1):
        tmp = next_one * (depth + 1) / ((j + 1) * safe_one)
        total_one = total_one + tmp
        next_one = weights[j] - tmp * zero * (depth - j) / (depth + 1)
        total_zero = total_zero + weights[j] / (zero * (depth - j) / (depth + 1))
    return np.where(one != 0, total_one, total_zero)


def _tree_shap_rows(tree: FlatTree, paths: List[_LeafPath], X: np.ndarray, phi: np.ndarray) -> None:
    n_rows = len(X)
    for path in paths:
        if len(path.features) == 0:
            continue
        one = np.ones((len(path.features), n_rows))
        for position, node, goes_left in path.edges:
            follows = X[:, tree.feature[node]] <= tree.threshold[node]
            one[position] *= follows if goes_left else ~follows

        weights = [np.ones(n_rows)]
        for position in range(len(path.features)):
            weights = _extend(weights, path.zero[position], one[position])
        for position, feature in enumerate(path.features):
            w = _unwound_sum(weights, path.zero[position], one[position])
            phi[:, feature] += w * (one[position] - path.zero[position]) * path.value


def _check_width(model: GBDTModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.shape[1] != model.n_features:
        raise ValueError(f"row width {X.shape[1]} does not match the model's {model.n_features} features")
    return X


def shap_matrix(model: GBDTModel, X: np.ndarray, max_workers: Optional[int] = None,
                chunk_size: int = 512) -> Tuple[np.ndarray, float]:
    """TreeSHAP attributions for every row.

    Args:
        model: Trained model with covers on every node
        X: (n_rows, n_features) matrix or a single row
        max_workers: Threads over row chunks
        chunk_size: Rows per chunk

    Returns:
        (phi of shape (n_rows, n_features), base_value)

    Raises:
        ValueError: On a width mismatch
    """
    X = _check_width(model, X)
    base_value = model.expected_margin()
    phi = np.zeros(X.shape)
    paths = [_leaf_paths(tree) for tree in model.flat_trees]

    def work(start: int) -> None:
        block = X[start:start + chunk_size]
        out = np.zeros(block.shape)
        for tree, tree_paths in zip(model.flat_trees, paths):
            _tree_shap_rows(tree, tree_paths, block, out)
        phi[start:start + chunk_size] = out

    starts = range(0, len(X), chunk_size)
    if max_workers and max_workers > 1 and len(X) > chunk_size:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            list(executor.map(work, starts))
    else:
        for start in starts:
            work(start)
    return phi, base_value


def tree_shap(model: GBDTModel, x: np.ndarray) -> ShapValues:
    """TreeSHAP attributions for a single row.

    ``base_value + phi.sum()`` equals ``model.predict_margin(x)``.
    """
    phi, base_value = shap_matrix(model, np.asarray(x, dtype=np.float64).reshape(1, -1))
    return ShapValues(phi[0], base_value, model.feature_names)
