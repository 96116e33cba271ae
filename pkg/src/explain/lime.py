"""Local linear surrogate explanations for tabular rows."""

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.utils.logger import app_logger as logger

ProbaFn = Callable[[np.ndarray], np.ndarray]

RIDGE_DAMPING = 1e-6
KERNEL_SCALE = 0.75
MIN_WEIGHT_SUM = 1e-8


@dataclass(frozen=True)
class LimeExplanation:
    """Weighted least-squares surrogate around one row.

    Coefficients refer to standardized features (training mean and std).
    """

    intercept: float
    weights: np.ndarray
    local_r2: float
    predicted_proba: float
    feature_names: Tuple[str, ...]
    kernel_width: float

    def top_features(self, n: int = 10) -> List[Dict[str, object]]:
        """Largest |weight| first, with the direction each feature pushes."""
        order = sorted(range(len(self.weights)), key=lambda j: (-abs(self.weights[j]), j))[:n]
        return [
            {
                "feature": self.feature_names[j],
                "weight": float(self.weights[j]),
                "direction": "toward_fraud" if self.weights[j] > 0 else "toward_legit",
            }
            for j in order
        ]

    def to_dict(self, top: int = 10) -> Dict[str, object]:
        return {
            "intercept": self.intercept,
            "local_r2": self.local_r2,
            "kernel_width": self.kernel_width,
            "predicted_proba": {"fraud": self.predicted_proba, "legit": 1.0 - self.predicted_proba},
            "weights": {name: float(w) for name, w in zip(self.feature_names, self.weights)},
            "top_features": self.top_features(top),
        }


def perturb(x: np.ndarray, X_train: np.ndarray, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """Copies of x where each feature is replaced, with probability 0.5, by a
    value drawn from its training column. The first sample is x itself."""
    n_features = len(x)
    samples = np.tile(x, (n_samples, 1))
    replace = rng.random((n_samples, n_features)) < 0.5
    replace[0] = False
    donors = rng.integers(0, len(X_train), size=(n_samples, n_features))
    draws = X_train[donors, np.arange(n_features)]
    samples[replace] = draws[replace]
    return samples


def weighted_r2(y: np.ndarray, fitted: np.ndarray, w: np.ndarray) -> float:
    """Weighted coefficient of determination clipped to [0, 1]; 1 when y is constant."""
    mean = np.dot(w, y) / w.sum()
    total = float(np.dot(w, (y - mean) ** 2))
    if total <= 0:
        return 1.0
    residual = float(np.dot(w, (y - fitted) ** 2))
    return float(min(1.0, max(0.0, 1.0 - residual / total)))


def lime_explain(
    predict_proba: ProbaFn,
    x: np.ndarray,
    X_train: np.ndarray,
    n_samples: int = 5000,
    kernel_width: Optional[float] = None,
    kernel_scale: float = KERNEL_SCALE,
    seed: int = 0,
    feature_names: Optional[Sequence[str]] = None,
) -> LimeExplanation:
    """Fit a locally weighted linear model to ``predict_proba`` around x.

    Args:
        predict_proba: Maps an (n, d) matrix to fraud probabilities
        x: Row to explain
        X_train: Rows providing feature marginals and standardisation
        n_samples: Perturbations, at least d + 2
        kernel_width: Exponential kernel width (default kernel_scale * sqrt(d))
        kernel_scale: Width per sqrt(d) when kernel_width is not given
        seed: Random seed
        feature_names: Names for the report

    Returns:
        LimeExplanation

    Raises:
        ValueError: On too few samples or vanishing kernel weights
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    X_train = np.asarray(X_train, dtype=np.float64)
    n_features = len(x)
    if X_train.ndim != 2 or X_train.shape[1] != n_features:
        raise ValueError(f"training rows must have {n_features} columns")
    if n_samples < n_features + 2:
        raise ValueError(f"n_samples must be at least {n_features + 2}, got {n_samples}")
    names = tuple(feature_names) if feature_names is not None else tuple(f"f{j}" for j in range(n_features))
    sigma = kernel_scale * np.sqrt(n_features) if kernel_width is None else float(kernel_width)

    rng = np.random.default_rng(seed)
    samples = perturb(x, X_train, n_samples, rng)

    mean = X_train.mean(axis=0)
    std = X_train.std(axis=0)
    std[std == 0] = 1.0
    Z = (samples - mean) / std
    distances = np.sqrt(((Z - Z[0]) ** 2).sum(axis=1))
    w = np.exp(-(distances ** 2) / sigma ** 2)
    if w.sum() < MIN_WEIGHT_SUM:
        raise ValueError(f"kernel weights vanish (sum {w.sum():.2e}); increase kernel_width above {sigma}")

    target = np.asarray(predict_proba(samples), dtype=np.float64)
    design = np.hstack([np.ones((n_samples, 1)), Z])
    damping = np.full(n_features + 1, RIDGE_DAMPING)
    damping[0] = 0.0
    gram = design.T @ (design * w[:, None]) + np.diag(damping)
    coef = np.linalg.solve(gram, design.T @ (w * target))
    fitted = design @ coef

    r2 = weighted_r2(target, fitted, w)
    explanation = LimeExplanation(
        intercept=float(coef[0]),
        weights=coef[1:],
        local_r2=r2,
        predicted_proba=float(target[0]),
        feature_names=names,
        kernel_width=sigma,
    )
    logger.debug(f"LIME surrogate: R^2={r2:.3f}, proba={target[0]:.4f}, sigma={sigma:.3f}")
    return explanation
