"""Stratified train/test split."""

import math
from typing import Dict, Tuple

import numpy as np

from src.data.table import Table
from src.utils.logger import app_logger as logger


def stratified_test_counts(class_counts: Dict[int, int], test_fraction: float) -> Dict[int, int]:
    """Allocate test rows per class by largest remainder.

    The total is ``round(n * test_fraction)`` and each class receives
    ``floor(count * fraction)`` or one more.
    """
    n = sum(class_counts.values())
    total = math.floor(n * test_fraction + 0.5)
    exact = {c: count * test_fraction for c, count in class_counts.items()}
    alloc = {c: math.floor(v) for c, v in exact.items()}
    leftover = total - sum(alloc.values())
    by_remainder = sorted(class_counts, key=lambda c: (-(exact[c] - alloc[c]), c))
    for c in by_remainder[: max(0, leftover)]:
        alloc[c] += 1
    return alloc


def stratified_indices(
    labels: np.ndarray, test_fraction: float, seed: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Row indices for a stratified split, each side sorted ascending.

    Raises:
        ValueError: On a bad fraction, fewer than two classes, or a class
            with at least two rows left empty on one side
    """
    if not 0 < test_fraction < 1:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    classes, counts = np.unique(labels, return_counts=True)
    if len(classes) < 2:
        raise ValueError("stratified split needs at least two classes")

    alloc = stratified_test_counts(dict(zip(classes.tolist(), counts.tolist())), test_fraction)
    rng = np.random.default_rng(seed)
    train_parts, test_parts = [], []
    for cls, count in zip(classes.tolist(), counts.tolist()):
        n_test = alloc[cls]
        if count >= 2 and (n_test == 0 or n_test == count):
            side = "test" if n_test == 0 else "train"
            raise ValueError(f"class {cls} ({count} rows) would have 0 rows in {side} split")
        members = np.flatnonzero(labels == cls)
        shuffled = members[rng.permutation(count)]
        test_parts.append(shuffled[:n_test])
        train_parts.append(shuffled[n_test:])

    train_idx = np.sort(np.concatenate(train_parts))
    test_idx = np.sort(np.concatenate(test_parts))
    return train_idx, test_idx


def stratified_split(table: Table, test_fraction: float, seed: int) -> Tuple[Table, Table]:
    """Split a labeled table into train/test preserving class ratios.

    Args:
        table: Labeled table
        test_fraction: Share of rows for the test side, in (0, 1)
        seed: Random seed; the split is deterministic per seed

    Returns:
        (train, test) tables, rows in original relative order
    """
    labels = table.labels()
    train_idx, test_idx = stratified_indices(labels, test_fraction, seed)
    logger.info(
        f"Stratified split: {len(train_idx)} train / {len(test_idx)} test "
        f"({int(labels[test_idx].sum())} positives in test)"
    )
    return table.take(train_idx), table.take(test_idx)
