"""Boosting loop."""

import time
from typing import Optional, Sequence

import numpy as np
from tqdm import tqdm

from src.gbdt.binning import BinMapper
from src.gbdt.config import GBDTConfig
from src.gbdt.growth import TreeGrower
from src.gbdt.loss import logit, logloss_grad_hess
from src.gbdt.model import GBDTModel
from src.gbdt.tree import FlatTree
from src.utils.logger import app_logger as logger

PROBA_CLAMP = 1e-6


def _sample(rng: np.random.Generator, n: int, fraction: float) -> np.ndarray:
    if fraction >= 1.0:
        return np.arange(n)
    size = max(1, int(round(fraction * n)))
    return np.sort(rng.choice(n, size=size, replace=False))


def validate_training_data(X: np.ndarray, y: np.ndarray) -> None:
    """Raise ValueError unless X is a finite non-empty matrix and y has both classes."""
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise ValueError(f"training matrix must be non-empty 2-D, got shape {X.shape}")
    if len(y) != len(X):
        raise ValueError(f"{len(X)} rows but {len(y)} labels")
    if not np.isfinite(X).all():
        raise ValueError("training matrix contains NaN or infinite values; impute first")
    labels = np.unique(y)
    if not set(labels.tolist()) <= {0, 1}:
        raise ValueError(f"labels must be 0/1, got {labels.tolist()}")
    if len(labels) < 2:
        raise ValueError(f"training labels contain a single class ({int(labels[0])})")


def initial_margin(y: np.ndarray, w: np.ndarray) -> float:
    """Log-odds of the weighted positive rate, clamped away from 0 and 1."""
    rate = float(np.dot(w, y) / w.sum()) if w.sum() > 0 else 0.5
    return logit(min(max(rate, PROBA_CLAMP), 1.0 - PROBA_CLAMP))


def train(
    X: np.ndarray,
    y: np.ndarray,
    cfg: GBDTConfig,
    feature_names: Optional[Sequence[str]] = None,
    progress: bool = False,
) -> GBDTModel:
    """Fit a boosted tree ensemble with logistic loss.

    Every round draws its row sample, then its feature sample, from one
    generator seeded with ``cfg.seed``; the result is deterministic per seed.

    Args:
        X: Finite numeric training matrix
        y: Labels in {0, 1}, both present
        cfg: Boosting configuration
        feature_names: Column names (default f0, f1, ...)
        progress: Show a tqdm bar over boosting rounds

    Returns:
        Trained GBDTModel

    Raises:
        ValueError: On empty or non-finite X, or single-class y
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    validate_training_data(X, y)
    y = y.astype(np.float64)
    n_rows, n_cols = X.shape
    names = tuple(feature_names) if feature_names is not None else tuple(f"f{j}" for j in range(n_cols))
    if len(names) != n_cols:
        raise ValueError(f"{len(names)} feature names for {n_cols} columns")

    started = time.perf_counter()
    w = np.where(y == 1, cfg.scale_pos_weight, 1.0)
    base_score = initial_margin(y, w)
    mapper = BinMapper.fit(X, cfg.n_bins)
    binned = mapper.transform(X)
    rng = np.random.default_rng(cfg.seed)

    margin = np.full(n_rows, base_score)
    trees = []
    rounds = tqdm(range(cfg.n_estimators), desc=f"{cfg.growth.value}", disable=not progress, leave=False)
    for round_index in rounds:
        g, h = logloss_grad_hess(y, margin, w)
        rows = _sample(rng, n_rows, cfg.subsample)
        features = _sample(rng, n_cols, cfg.colsample_bytree)
        grower = TreeGrower(binned[np.ix_(rows, features)], g[rows], h[rows], features, mapper, cfg)
        tree = grower.grow()
        trees.append(tree)
        margin += FlatTree.from_node(tree).predict(X)
        logger.debug(f"{cfg.growth.value} tree {round_index}: {tree.n_leaves()} leaves, depth {tree.depth()}")

    model = GBDTModel(tuple(trees), base_score, cfg, names)
    elapsed = time.perf_counter() - started
    logger.debug(
        f"Trained {cfg.growth.value} GBDT: {len(trees)} trees on {n_rows}x{n_cols} in {elapsed:.2f}s"
    )
    return model
