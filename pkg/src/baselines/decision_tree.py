"""Single decision tree baseline, built as a one-tree boosted model."""

from typing import Optional, Sequence

import numpy as np

from src.gbdt.config import GBDTConfig, Growth
from src.gbdt.model import GBDTModel
from src.gbdt.trainer import train


def decision_tree_config(max_depth: int = 6, seed: int = 0) -> GBDTConfig:
    """One full-data depth-wise tree with unit step and no shrinkage penalty."""
    return GBDTConfig(
        n_estimators=1, max_depth=max_depth, learning_rate=1.0, subsample=1.0,
        colsample_bytree=1.0, growth=Growth.DEPTH_WISE, reg_lambda=0.0, gamma=0.0, seed=seed,
    )


def train_decision_tree(X: np.ndarray, y: np.ndarray, max_depth: int = 6,
                        feature_names: Optional[Sequence[str]] = None, seed: int = 0) -> GBDTModel:
    """Depth 0 gives the base-rate constant predictor."""
    return train(X, y, decision_tree_config(max_depth, seed), feature_names=feature_names)
