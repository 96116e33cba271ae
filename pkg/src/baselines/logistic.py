"""L2-regularised logistic regression trained by backtracking gradient descent."""

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from src.gbdt.loss import sigmoid
from src.gbdt.persistence import check_header, dumps, read_document
from src.utils.errors import ModelFormatError
from src.utils.logger import app_logger as logger

KIND = "linear"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class LinearModel:
    """Weights act on standardized features ``(x - mean) / std``."""

    weights: np.ndarray
    bias: float
    mean: np.ndarray
    std: np.ndarray
    feature_names: Tuple[str, ...] = ()
    converged: bool = False
    n_iters: int = 0

    def __post_init__(self):
        if not len(self.weights) == len(self.mean) == len(self.std):
            raise ValueError("weights, mean and std must have one entry per feature")

    @property
    def n_features(self) -> int:
        return len(self.weights)

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} columns, got shape {X.shape}")
        return ((X - self.mean) / self.std) @ self.weights + self.bias

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return sigmoid(self.decision_function(X))


def standardize(X: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0] = 1.0
    return (X - mean) / std, mean, std


def loss_and_gradient(Z: np.ndarray, y: np.ndarray, params: np.ndarray, l2: float) -> Tuple[float, np.ndarray]:
    """Mean log-loss plus ``l2/2 * |w|^2`` (bias unpenalised) and its gradient.

    ``params`` is ``[w..., b]``.
    """
    w, b = params[:-1], params[-1]
    margin = Z @ w + b
    loss = float(np.mean(np.logaddexp(0.0, margin) - y * margin) + 0.5 * l2 * np.dot(w, w))
    residual = (sigmoid(margin) - y) / len(y)
    grad = np.append(Z.T @ residual + l2 * w, residual.sum())
    return loss, grad


def train_logreg(
    X: np.ndarray,
    y: np.ndarray,
    l2: float = 1.0,
    max_iters: int = 500,
    tol: float = 1e-6,
    feature_names: Optional[Sequence[str]] = None,
) -> LinearModel:
    """Fit weights from a zero start with Armijo backtracking line search.

    Args:
        X: Training matrix
        y: Binary labels, both present
        l2: Penalty on the weights, >= 0
        max_iters: Iteration cap; 0 returns the zero model
        tol: Converged once the gradient's max-norm drops below this

    Returns:
        LinearModel whose ``converged`` records how training stopped

    Raises:
        ValueError: On single-class labels or bad arguments
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).astype(np.float64)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError(f"X must be 2-D with one row per label, got {X.shape} and {len(y)} labels")
    if len(np.unique(y)) != 2:
        raise ValueError("logistic regression needs both classes in y")
    if l2 < 0 or max_iters < 0 or tol <= 0:
        raise ValueError("l2 and max_iters must be >= 0 and tol > 0")
    names = tuple(feature_names) if feature_names is not None else tuple(f"f{j}" for j in range(X.shape[1]))

    Z, mean, std = standardize(X)
    params = np.zeros(X.shape[1] + 1)
    loss, grad = loss_and_gradient(Z, y, params, l2)
    converged = bool(np.max(np.abs(grad)) < tol)
    step = 1.0
    iters = 0
    while not converged and iters < max_iters:
        iters += 1
        sq_norm = float(np.dot(grad, grad))
        # Armijo condition with c = 1e-4, halving the step.
        while True:
            candidate = params - step * grad
            new_loss, new_grad = loss_and_gradient(Z, y, candidate, l2)
            if new_loss <= loss - 1e-4 * step * sq_norm or step < 1e-12:
                break
            step *= 0.5
        params, loss, grad = candidate, new_loss, new_grad
        step = min(step * 2.0, 1e3)
        converged = bool(np.max(np.abs(grad)) < tol)

    if converged:
        logger.debug(f"Logistic regression converged after {iters} iterations (loss {loss:.6f})")
    else:
        logger.info(f"Logistic regression stopped at the {max_iters}-iteration cap (loss {loss:.6f})")
    return LinearModel(params[:-1].copy(), float(params[-1]), mean, std, names, converged, iters)


def linear_to_dict(model: LinearModel) -> Dict[str, Any]:
    return {
        "format_version": FORMAT_VERSION,
        "kind": KIND,
        "feature_names": list(model.feature_names),
        "weights": model.weights.tolist(),
        "bias": model.bias,
        "mean": model.mean.tolist(),
        "std": model.std.tolist(),
        "converged": model.converged,
        "n_iters": model.n_iters,
    }


def linear_from_dict(doc: Mapping[str, Any]) -> LinearModel:
    check_header(doc, KIND)
    try:
        return LinearModel(
            np.asarray(doc["weights"], dtype=np.float64),
            float(doc["bias"]),
            np.asarray(doc["mean"], dtype=np.float64),
            np.asarray(doc["std"], dtype=np.float64),
            tuple(doc.get("feature_names", ())),
            bool(doc.get("converged", False)),
            int(doc.get("n_iters", 0)),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ModelFormatError(f"invalid linear model document: {e}") from e


def save_linear(model: LinearModel, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(linear_to_dict(model)), encoding="utf-8")
    return path


def load_linear(path: Path) -> LinearModel:
    return linear_from_dict(read_document(path))
