"""Histogram tree growers for the depth-wise, leaf-wise and symmetric strategies."""

import heapq
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from src.gbdt.binning import BinMapper
from src.gbdt.config import GBDTConfig, Growth
from src.gbdt.splitter import SplitCandidate, best_split, split_gains
from src.gbdt.tree import TreeNode


@dataclass
class _Node:
    rows: np.ndarray
    depth: int
    grad: float
    hess: float
    split: Optional[SplitCandidate] = None
    children: Optional[Tuple[int, int]] = None


class TreeGrower:
    """Grows one tree on a row/feature sample.

    Histograms for several nodes are built with a single ``np.bincount`` over
    node-offset bin indices; accumulation within a bin follows row order, so
    the result does not depend on scheduling.
    """

    def __init__(self, binned: np.ndarray, g: np.ndarray, h: np.ndarray,
                 features: np.ndarray, mapper: BinMapper, cfg: GBDTConfig):
        """Initialize the grower.

        Args:
            binned: (n_rows, n_selected_features) bin indices of the sampled rows
            g: Gradients of the sampled rows
            h: Hessians of the sampled rows
            features: Original column index of every selected feature
            mapper: Bin edges fitted on the full training matrix
            cfg: Boosting configuration
        """
        self.binned = binned
        self.g = g
        self.h = h
        self.features = features
        self.mapper = mapper
        self.cfg = cfg
        self.n_features = binned.shape[1]
        self.width = int(mapper.n_bins[features].max()) if len(features) else 1
        self.offset_bins = binned.astype(np.int64) + np.arange(self.n_features, dtype=np.int64) * self.width
        self.nodes: List[_Node] = []

    def _new_node(self, rows: np.ndarray, depth: int) -> int:
        self.nodes.append(_Node(rows, depth, float(self.g[rows].sum()), float(self.h[rows].sum())))
        return len(self.nodes) - 1

    def _histograms(self, node_ids: List[int]) -> Tuple[np.ndarray, np.ndarray]:
        block = self.n_features * self.width
        rows = np.concatenate([self.nodes[i].rows for i in node_ids])
        owner = np.repeat(np.arange(len(node_ids), dtype=np.int64),
                          [len(self.nodes[i].rows) for i in node_ids])
        index = (owner[:, None] * block + self.offset_bins[rows]).ravel()
        size = len(node_ids) * block
        shape = (len(node_ids), self.n_features, self.width)
        grad = np.bincount(index, weights=np.repeat(self.g[rows], self.n_features), minlength=size)
        hess = np.bincount(index, weights=np.repeat(self.h[rows], self.n_features), minlength=size)
        return grad.reshape(shape), hess.reshape(shape)

    def _apply_split(self, node_id: int, candidate: SplitCandidate) -> Tuple[int, int]:
        node = self.nodes[node_id]
        goes_left = self.binned[node.rows, candidate.feature] <= candidate.bin
        left = self._new_node(node.rows[goes_left], node.depth + 1)
        right = self._new_node(node.rows[~goes_left], node.depth + 1)
        node.split = candidate
        node.children = (left, right)
        return left, right

    def _best(self, node_id: int) -> Optional[SplitCandidate]:
        grad, hess = self._histograms([node_id])
        return best_split(grad[0], hess[0], self.cfg.reg_lambda, self.cfg.gamma)

    def grow(self) -> TreeNode:
        """Grow the tree with the configured strategy and return its root."""
        root = self._new_node(np.arange(len(self.g)), 0)
        if self.width >= 2:
            strategy = {
                Growth.DEPTH_WISE: self._grow_depth_wise,
                Growth.LEAF_WISE: self._grow_leaf_wise,
                Growth.SYMMETRIC: self._grow_symmetric,
            }[self.cfg.growth]
            strategy(root)
        return self._to_tree(root)

    def _grow_depth_wise(self, root: int) -> None:
        frontier = [root]
        for _ in range(self.cfg.max_depth):
            if not frontier:
                break
            grad, hess = self._histograms(frontier)
            next_frontier: List[int] = []
            for i, node_id in enumerate(frontier):
                candidate = best_split(grad[i], hess[i], self.cfg.reg_lambda, self.cfg.gamma)
                if candidate is not None:
                    next_frontier.extend(self._apply_split(node_id, candidate))
            frontier = next_frontier

    def _grow_leaf_wise(self, root: int) -> None:
        # Heap entries: (-gain, node id); equal gains pop in creation order.
        heap: List[Tuple[float, int, SplitCandidate]] = []

        def push(node_id: int) -> None:
            if self.nodes[node_id].depth >= self.cfg.max_depth:
                return
            candidate = self._best(node_id)
            if candidate is not None:
                heapq.heappush(heap, (-candidate.gain, node_id, candidate))

        push(root)
        n_leaves = 1
        while heap and n_leaves < self.cfg.max_leaves:
            _, node_id, candidate = heapq.heappop(heap)
            left, right = self._apply_split(node_id, candidate)
            n_leaves += 1
            push(left)
            push(right)

    def _grow_symmetric(self, root: int) -> None:
        frontier = [root]
        for _ in range(self.cfg.max_depth):
            if not frontier:
                break
            grad, hess = self._histograms(frontier)
            gains = np.stack([split_gains(grad[i], hess[i], self.cfg.reg_lambda) for i in range(len(frontier))])
            valid = np.isfinite(gains)
            total = np.where(valid, gains, 0.0).sum(axis=0) - self.cfg.gamma
            total = np.where(valid.any(axis=0), total, -np.inf)
            flat = int(np.argmax(total))
            if not total.flat[flat] > 0:
                break
            feature, bin_index = (int(v) for v in np.unravel_index(flat, total.shape))
            next_frontier: List[int] = []
            for i, node_id in enumerate(frontier):
                # Nodes that cannot take the shared split stay leaves.
                if valid[i, feature, bin_index]:
                    candidate = SplitCandidate(feature, bin_index, float(gains[i, feature, bin_index]))
                    next_frontier.extend(self._apply_split(node_id, candidate))
            frontier = next_frontier

    def _leaf_value(self, node: _Node) -> float:
        if node.hess == 0:
            return 0.0
        return -node.grad / (node.hess + self.cfg.reg_lambda) * self.cfg.learning_rate

    def _to_tree(self, node_id: int) -> TreeNode:
        node = self.nodes[node_id]
        if node.children is None:
            return TreeNode.leaf(self._leaf_value(node), node.hess)
        left, right = node.children
        feature = int(self.features[node.split.feature])
        return TreeNode.split(
            feature,
            self.mapper.threshold(feature, node.split.bin),
            self._to_tree(left),
            self._to_tree(right),
        )
