"""Binary logistic loss and its derivatives with respect to the margin."""

from typing import Tuple

import numpy as np


def sigmoid(margin: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    margin = np.asarray(margin, dtype=np.float64)
    e = np.exp(-np.abs(margin))
    return np.where(margin >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def logit(p: float) -> float:
    return float(np.log(p / (1.0 - p)))


def logloss(y: np.ndarray, margin: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Per-row weighted log-loss ``w * (log(1 + e^m) - y * m)``."""
    margin = np.asarray(margin, dtype=np.float64)
    return np.asarray(w, dtype=np.float64) * (np.logaddexp(0.0, margin) - np.asarray(y) * margin)


def mean_logloss(y: np.ndarray, margin: np.ndarray, w: np.ndarray) -> float:
    """Weighted mean log-loss."""
    w = np.asarray(w, dtype=np.float64)
    return float(logloss(y, margin, w).sum() / w.sum())


def logloss_grad_hess(y: np.ndarray, margin: np.ndarray, w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """First and second derivative of :func:`logloss`.

    Args:
        y: Labels in {0, 1}
        margin: Current log-odds
        w: Sample weights (> 0)

    Returns:
        (g, h) with g = w (p - y) and h = w p (1 - p)
    """
    margin = np.asarray(margin, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    p = sigmoid(margin)
    # 1 - p loses all precision once p rounds to 1; evaluate it directly.
    q = sigmoid(-margin)
    return w * (p - np.asarray(y, dtype=np.float64)), w * p * q
