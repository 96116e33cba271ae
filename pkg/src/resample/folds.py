"""Stratified k-fold assignment."""

from dataclasses import dataclass
from typing import Iterator, Tuple

import numpy as np

from src.utils.logger import app_logger as logger


@dataclass(frozen=True)
class FoldAssignment:
    """Fold index in [0, k) for every row."""

    fold_index: np.ndarray
    k: int

    def split(self, fold: int) -> Tuple[np.ndarray, np.ndarray]:
        """(train rows, validation rows) for one fold, both ascending."""
        if not 0 <= fold < self.k:
            raise ValueError(f"fold {fold} out of range [0, {self.k})")
        mask = self.fold_index == fold
        return np.flatnonzero(~mask), np.flatnonzero(mask)

    def __iter__(self) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        for fold in range(self.k):
            yield self.split(fold)

    def __len__(self) -> int:
        return self.k


def stratified_kfold(y: np.ndarray, k: int, seed: int) -> FoldAssignment:
    """Assign rows to k folds preserving class proportions.

    Members of each class are shuffled and dealt round-robin; each class starts
    where the previous one stopped so total fold sizes stay within one row.

    Args:
        y: Class labels
        k: Number of folds (>= 2)
        seed: Random seed

    Returns:
        FoldAssignment

    Raises:
        ValueError: If k < 2 or some class has fewer than k rows
    """
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    y = np.asarray(y)
    classes, counts = np.unique(y, return_counts=True)
    small = [int(c) for c, n in zip(classes, counts) if n < k]
    if small:
        raise ValueError(f"classes {small} have fewer than k={k} rows")

    rng = np.random.default_rng(seed)
    fold_index = np.empty(len(y), dtype=np.int64)
    offset = 0
    for cls, count in zip(classes, counts):
        members = np.flatnonzero(y == cls)[rng.permutation(count)]
        fold_index[members] = (offset + np.arange(count)) % k
        offset = (offset + count) % k

    logger.debug(f"Stratified {k}-fold over {len(y)} rows, fold sizes {np.bincount(fold_index, minlength=k).tolist()}")
    return FoldAssignment(fold_index, k)
