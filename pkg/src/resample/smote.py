"""SMOTE oversampling of the minority class."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.utils.logger import app_logger as logger

# Budget of float64 cells per distance chunk (rows x minority x features).
_DISTANCE_CELLS = 4_000_000


class SmoteConfig(BaseModel):
    """Parameters for :func:`smote`."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    k_neighbors: int = Field(default=5, ge=1)
    target_ratio: float = Field(default=1.0, gt=0.0, le=1.0)
    seed: int = 0
    scaled: bool = Field(default=False, description="Min-max scale features for the neighbour search only")


@dataclass(frozen=True)
class SmoteResult:
    """Balanced data plus the provenance of every synthetic row.

    Synthetic row ``s`` equals ``X[base_rows[s]] + u[s] * (X[neighbor_rows[s]] - X[base_rows[s]])``
    where both indices refer to rows of the input matrix.
    """

    X: np.ndarray
    y: np.ndarray
    base_rows: np.ndarray
    neighbor_rows: np.ndarray
    u: np.ndarray

    @property
    def n_synthetic(self) -> int:
        return len(self.u)


def class_counts(y: np.ndarray) -> Dict[int, int]:
    """Row count per label, labels ascending."""
    labels, counts = np.unique(y, return_counts=True)
    return {int(label): int(count) for label, count in zip(labels, counts)}


def nearest_neighbors(points: np.ndarray, k: int, max_workers: Optional[int] = None) -> np.ndarray:
    """Indices of the k nearest other points by Euclidean distance.

    Ties are broken by row index. A point never lists itself, but exact
    duplicates of it are valid neighbours.

    Args:
        points: (m, d) matrix
        k: Neighbours per point, at most m - 1
        max_workers: Threads for chunked distance computation

    Returns:
        (m, k) integer matrix
    """
    m, d = points.shape
    chunk = max(1, _DISTANCE_CELLS // max(1, m * max(d, 1)))
    starts = list(range(0, m, chunk))

    def block(start: int) -> np.ndarray:
        rows = points[start:start + chunk]
        diff = rows[:, None, :] - points[None, :, :]
        dist = np.einsum("ijk,ijk->ij", diff, diff)
        dist[np.arange(len(rows)), np.arange(start, start + len(rows))] = np.inf
        return np.argsort(dist, axis=1, kind="stable")[:, :k]

    if max_workers and max_workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            blocks = list(executor.map(block, starts))
    else:
        blocks = [block(start) for start in starts]
    return np.vstack(blocks) if blocks else np.empty((0, k), dtype=np.int64)


def _minmax(X: np.ndarray) -> np.ndarray:
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    span[span == 0] = 1.0
    return (X - lo) / span


def oversample(X: np.ndarray, y: np.ndarray, cfg: SmoteConfig,
               max_workers: Optional[int] = None) -> SmoteResult:
    """Append synthetic minority rows until minority = round(target_ratio * majority).

    Original rows are returned first, unchanged and in order. Base rows are
    visited round-robin in minority row order; the neighbour choice and the
    interpolation factor are drawn per synthetic row from a generator seeded
    with ``cfg.seed``.

    Args:
        X: Numeric feature matrix
        y: Binary labels
        cfg: SMOTE parameters
        max_workers: Threads for the neighbour search

    Returns:
        SmoteResult with balanced data and provenance

    Raises:
        ValueError: If the minority class has fewer than two rows or y is not binary
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError(f"X must be 2-D with one row per label, got {X.shape} and {len(y)} labels")
    counts = class_counts(y)
    if len(counts) != 2:
        raise ValueError(f"SMOTE needs exactly two classes, got {sorted(counts)}")

    (label_a, count_a), (label_b, count_b) = counts.items()
    minority_label = label_a if count_a < count_b else label_b
    n_min = min(count_a, count_b)
    n_maj = max(count_a, count_b)
    if n_min < 2:
        raise ValueError(f"minority class has {n_min} row(s); SMOTE needs at least 2")

    n_target = int(round(cfg.target_ratio * n_maj))
    n_synth = max(0, n_target - n_min)
    if n_target < n_min:
        logger.warning(f"target_ratio {cfg.target_ratio} is below the current ratio; no rows generated")

    empty = np.empty(0, dtype=np.int64)
    if n_synth == 0:
        return SmoteResult(X.copy(), y.copy(), empty, empty, np.empty(0))

    k = cfg.k_neighbors
    if k >= n_min:
        logger.warning(f"k_neighbors={k} >= minority count {n_min}; clamping to {n_min - 1}")
        k = n_min - 1

    minority_rows = np.flatnonzero(y == minority_label)
    minority = X[minority_rows]
    search_space = _minmax(X)[minority_rows] if cfg.scaled else minority
    neighbors = nearest_neighbors(search_space, k, max_workers=max_workers)

    rng = np.random.default_rng(cfg.seed)
    base_local = np.arange(n_synth) % n_min
    pick = rng.integers(0, k, size=n_synth)
    u = rng.random(n_synth)
    neighbor_local = neighbors[base_local, pick]

    synthetic = minority[base_local] + u[:, None] * (minority[neighbor_local] - minority[base_local])
    X_out = np.vstack([X, synthetic])
    y_out = np.concatenate([y, np.full(n_synth, minority_label, dtype=y.dtype)])

    logger.info(
        f"SMOTE: minority {n_min} -> {n_min + n_synth}, majority {n_maj} "
        f"(k={k}, ratio={cfg.target_ratio}, scaled={cfg.scaled})"
    )
    return SmoteResult(X_out, y_out, minority_rows[base_local], minority_rows[neighbor_local], u)


def smote(X: np.ndarray, y: np.ndarray, cfg: SmoteConfig,
          max_workers: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Balanced (X, y); see :func:`oversample`."""
    result = oversample(X, y, cfg, max_workers=max_workers)
    return result.X, result.y
