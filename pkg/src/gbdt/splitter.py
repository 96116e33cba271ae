"""Second-order split gain over gradient/hessian histograms."""

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class SplitCandidate:
    """Split after ``bin`` of ``feature``: bins <= bin go left."""

    feature: int
    bin: int
    gain: float


def split_gains(grad_hist: np.ndarray, hess_hist: np.ndarray, reg_lambda: float) -> np.ndarray:
    """Gain of every bin boundary, before the gamma penalty.

    Args:
        grad_hist: (n_features, n_bins) gradient sums
        hess_hist: (n_features, n_bins) hessian sums
        reg_lambda: L2 regulariser

    Returns:
        (n_features, n_bins - 1) gains; -inf where a side has no hessian mass
    """
    g_left = np.cumsum(grad_hist, axis=1)[:, :-1]
    h_left = np.cumsum(hess_hist, axis=1)[:, :-1]
    g_total = grad_hist.sum(axis=1, keepdims=True)
    h_total = hess_hist.sum(axis=1, keepdims=True)
    g_right = g_total - g_left
    h_right = h_total - h_left

    valid = (h_left > 0) & (h_right > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        gain = 0.5 * (
            g_left ** 2 / (h_left + reg_lambda)
            + g_right ** 2 / (h_right + reg_lambda)
            - g_total ** 2 / (h_total + reg_lambda)
        )
    return np.where(valid, gain, -np.inf)


def best_split(grad_hist: np.ndarray, hess_hist: np.ndarray,
               reg_lambda: float, gamma: float) -> Optional[SplitCandidate]:
    """Highest-gain boundary, or None when no boundary beats ``gamma``.

    Ties go to the lowest feature, then the lowest bin. A 1-D histogram is
    treated as a single feature.

    Args:
        grad_hist: Per-bin gradient sums, (n_bins,) or (n_features, n_bins)
        hess_hist: Per-bin hessian sums, same shape
        reg_lambda: L2 regulariser (lambda)
        gamma: Gain threshold subtracted from every candidate

    Returns:
        SplitCandidate with the penalised gain, or None
    """
    grad_hist = np.atleast_2d(np.asarray(grad_hist, dtype=np.float64))
    hess_hist = np.atleast_2d(np.asarray(hess_hist, dtype=np.float64))
    if grad_hist.shape != hess_hist.shape:
        raise ValueError(f"histogram shapes differ: {grad_hist.shape} vs {hess_hist.shape}")
    if grad_hist.shape[1] < 2:
        return None

    gains = split_gains(grad_hist, hess_hist, reg_lambda) - gamma
    flat = int(np.argmax(gains))
    best = float(gains.flat[flat])
    if not best > 0:
        return None
    feature, bin_index = np.unravel_index(flat, gains.shape)
    return SplitCandidate(int(feature), int(bin_index), best)
