"""Stacking of three boosted tree base learners under a boosted meta-learner.

Meta-features are out-of-fold base probabilities: for every fold the base
models are trained on the other folds (after optional resampling of that
training part only) and predict the held-out rows.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from tqdm import tqdm

from src.evaluation.metrics import best_f1_threshold, rank_auc
from src.gbdt.config import GBDTConfig
from src.gbdt.model import GBDTModel
from src.gbdt.persistence import check_header, dumps, model_from_dict, model_to_dict, read_document
from src.gbdt.trainer import train
from src.resample.folds import FoldAssignment, stratified_kfold
from src.utils.errors import FeatureMismatchError, ModelFormatError
from src.utils.logger import app_logger as logger

BASE_NAMES = ("base1", "base2", "base3")
COMPONENTS = BASE_NAMES + ("meta",)
THRESHOLD_CLAMP = 1e-6
KIND = "stacking"
FORMAT_VERSION = 1

# (X, y, seed) -> resampled (X, y); applied to training parts only.
Resampler = Callable[[np.ndarray, np.ndarray, int], Tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class StackingModel:
    """Three base models, a meta model over their probabilities, and a cutoff."""

    base_models: Tuple[GBDTModel, GBDTModel, GBDTModel]
    meta_model: GBDTModel
    selected_features: Tuple[str, ...]
    threshold: float

    def __post_init__(self):
        object.__setattr__(self, "base_models", tuple(self.base_models))
        object.__setattr__(self, "selected_features", tuple(self.selected_features))
        if len(self.base_models) != 3:
            raise ValueError(f"stacking needs exactly 3 base models, got {len(self.base_models)}")
        if self.meta_model.n_features != 3:
            raise ValueError(f"meta model must take 3 inputs, got {self.meta_model.n_features}")
        if not 0 < self.threshold < 1:
            raise ValueError(f"threshold must be in (0, 1), got {self.threshold}")

    def component(self, name: str) -> GBDTModel:
        """``base1``, ``base2``, ``base3`` or ``meta``."""
        if name == "meta":
            return self.meta_model
        if name not in BASE_NAMES:
            raise ValueError(f"unknown component {name!r}; expected one of {COMPONENTS}")
        return self.base_models[BASE_NAMES.index(name)]

    def align(self, X: np.ndarray, feature_names: Optional[Sequence[str]] = None) -> np.ndarray:
        """Select and order the model's feature columns.

        Raises:
            FeatureMismatchError: If a selected feature is absent from ``feature_names``
        """
        X = np.asarray(X, dtype=np.float64)
        if feature_names is None:
            return X
        names = list(feature_names)
        if any(name not in names for name in self.selected_features):
            raise FeatureMismatchError(self.selected_features, names)
        return X[:, [names.index(name) for name in self.selected_features]]

    def base_probabilities(self, X: np.ndarray, feature_names: Optional[Sequence[str]] = None) -> np.ndarray:
        """(n_rows, 3) matrix of base model fraud probabilities."""
        X = self.align(X, feature_names)
        return np.column_stack([model.predict_proba(X) for model in self.base_models])

    def predict_proba(self, X: np.ndarray, feature_names: Optional[Sequence[str]] = None) -> np.ndarray:
        """Meta-model fraud probability per row."""
        return self.meta_model.predict_proba(self.base_probabilities(X, feature_names))

    def classify(self, X: np.ndarray, feature_names: Optional[Sequence[str]] = None) -> np.ndarray:
        """1 where the stacked probability is >= threshold."""
        return (self.predict_proba(X, feature_names) >= self.threshold).astype(np.int64)

    def with_threshold(self, threshold: float) -> "StackingModel":
        return StackingModel(self.base_models, self.meta_model, self.selected_features, threshold)


@dataclass(frozen=True)
class OutOfFoldResult:
    """Meta-features plus the rows each fold's base models were trained on."""

    meta_features: np.ndarray
    folds: FoldAssignment
    train_rows: Tuple[np.ndarray, ...]


@dataclass(frozen=True)
class StackingResult:
    model: StackingModel
    oof: OutOfFoldResult
    meta_oof: np.ndarray
    fold_aucs: Tuple[float, ...]
    base_oof_aucs: Tuple[float, float, float]
    oof_f1: float


def _fit(X: np.ndarray, y: np.ndarray, cfg: GBDTConfig, names: Sequence[str],
         resampler: Optional[Resampler], seed: int) -> GBDTModel:
    if resampler is not None:
        X, y = resampler(X, y, seed)
    return train(X, y, cfg, feature_names=names)


def out_of_fold_predictions(
    X: np.ndarray,
    y: np.ndarray,
    base_cfgs: Sequence[GBDTConfig],
    folds: FoldAssignment,
    feature_names: Sequence[str],
    resampler: Optional[Resampler] = None,
    seed: int = 0,
    max_workers: Optional[int] = None,
    progress: bool = False,
) -> OutOfFoldResult:
    """Out-of-fold probabilities of every base config, one column per config.

    Fold/base jobs may run concurrently; results are assembled in fold order.
    """
    splits = list(folds)
    jobs = [(f, b) for f in range(folds.k) for b in range(len(base_cfgs))]

    def run(job: Tuple[int, int]) -> np.ndarray:
        f, b = job
        train_rows, valid_rows = splits[f]
        model = _fit(X[train_rows], y[train_rows], base_cfgs[b], feature_names, resampler, seed + f)
        return model.predict_proba(X[valid_rows])

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            outputs = list(tqdm(executor.map(run, jobs), total=len(jobs), desc="stacking folds",
                                disable=not progress, leave=False))
    else:
        outputs = [run(job) for job in tqdm(jobs, desc="stacking folds", disable=not progress, leave=False)]

    meta_features = np.zeros((len(y), len(base_cfgs)))
    for (f, b), proba in zip(jobs, outputs):
        meta_features[splits[f][1], b] = proba
    return OutOfFoldResult(meta_features, folds, tuple(train for train, _ in splits))


def _clamp_threshold(threshold: float) -> float:
    clamped = min(max(threshold, THRESHOLD_CLAMP), 1.0 - THRESHOLD_CLAMP)
    if clamped != threshold:
        logger.warning(f"Decision threshold {threshold} clamped to {clamped}")
    return clamped


def train_stacking(
    X: np.ndarray,
    y: np.ndarray,
    base_cfgs: Sequence[GBDTConfig],
    meta_cfg: GBDTConfig,
    k: int = 5,
    seed: int = 0,
    feature_names: Optional[Sequence[str]] = None,
    resampler: Optional[Resampler] = None,
    naive: bool = False,
    threshold: Union[str, float] = "f1_optimal",
    max_workers: Optional[int] = None,
    progress: bool = False,
) -> StackingResult:
    """Train the stack.

    Args:
        X: Training matrix restricted to the selected features
        y: Labels
        base_cfgs: Exactly three base configs
        meta_cfg: Meta-learner config
        k: Folds for out-of-fold meta-features
        seed: Seed for folds and resampling
        feature_names: Names of X's columns
        resampler: Applied to every training part (never to held-out rows)
        naive: Build meta-features from in-sample predictions of the refit bases
        threshold: ``"f1_optimal"`` (fit on meta out-of-fold probabilities) or a fixed value
        max_workers: Threads for fold/base jobs
        progress: Show progress bars

    Returns:
        StackingResult with the model and cross-validation diagnostics
    """
    if len(base_cfgs) != 3:
        raise ValueError(f"stacking needs exactly 3 base configs, got {len(base_cfgs)}")
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).astype(np.int64)
    names = tuple(feature_names) if feature_names is not None else tuple(f"f{j}" for j in range(X.shape[1]))
    started = time.perf_counter()

    folds = stratified_kfold(y, k, seed)
    logger.info(f"Refitting {len(base_cfgs)} base models on {len(y)} rows")
    full_jobs = list(range(len(base_cfgs)))

    def refit(b: int) -> GBDTModel:
        return _fit(X, y, base_cfgs[b], names, resampler, seed + k)

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            base_models = list(executor.map(refit, full_jobs))
    else:
        base_models = [refit(b) for b in full_jobs]

    if naive:
        logger.warning("Naive stacking: meta-features are in-sample base predictions")
        meta_features = np.column_stack([model.predict_proba(X) for model in base_models])
        oof = OutOfFoldResult(meta_features, folds, tuple(np.arange(len(y)) for _ in range(k)))
    else:
        oof = out_of_fold_predictions(X, y, base_cfgs, folds, names, resampler, seed, max_workers, progress)

    base_aucs = tuple(rank_auc(y, oof.meta_features[:, b]) for b in range(3))
    for name, auc in zip(BASE_NAMES, base_aucs):
        logger.info(f"{name} out-of-fold AUC: {auc:.4f}")

    meta_names = BASE_NAMES
    meta_model = train(oof.meta_features, y, meta_cfg, feature_names=meta_names)

    # Meta-level validation predictions over the same folds.
    meta_oof = np.zeros(len(y))
    fold_aucs: List[float] = []
    for train_rows, valid_rows in folds:
        fold_meta = train(oof.meta_features[train_rows], y[train_rows], meta_cfg, feature_names=meta_names)
        meta_oof[valid_rows] = fold_meta.predict_proba(oof.meta_features[valid_rows])
        fold_aucs.append(rank_auc(y[valid_rows], meta_oof[valid_rows]))
    logger.info(
        f"Stack CV AUC per fold: {[round(a, 4) for a in fold_aucs]} "
        f"(mean {np.mean(fold_aucs):.4f}, spread {max(fold_aucs) - min(fold_aucs):.4f})"
    )

    best_t, best_f1 = best_f1_threshold(y, meta_oof)
    if threshold == "f1_optimal":
        chosen = _clamp_threshold(best_t)
        logger.info(f"F1-optimal threshold on validation predictions: {chosen:.4f} (F1 {best_f1:.4f})")
    else:
        chosen = _clamp_threshold(float(threshold))
        logger.info(f"Fixed decision threshold: {chosen}")

    model = StackingModel(tuple(base_models), meta_model, names, chosen)
    logger.info(f"Stacking trained in {time.perf_counter() - started:.1f}s")
    return StackingResult(model, oof, meta_oof, tuple(fold_aucs), base_aucs, best_f1)


def stacking_to_dict(model: StackingModel) -> Dict[str, Any]:
    return {
        "format_version": FORMAT_VERSION,
        "kind": KIND,
        "selected_features": list(model.selected_features),
        "threshold": model.threshold,
        "base_models": [model_to_dict(base) for base in model.base_models],
        "meta_model": model_to_dict(model.meta_model),
    }


def stacking_from_dict(doc: Mapping[str, Any]) -> StackingModel:
    """Rebuild a StackingModel.

    Raises:
        ModelFormatError: On a version, kind or structure problem
    """
    check_header(doc, KIND)
    missing = [key for key in ("selected_features", "threshold", "base_models", "meta_model") if key not in doc]
    if missing:
        raise ModelFormatError(f"stacking document is missing {missing}")
    bases = tuple(model_from_dict(base) for base in doc["base_models"])
    try:
        return StackingModel(bases, model_from_dict(doc["meta_model"]),
                             tuple(doc["selected_features"]), float(doc["threshold"]))
    except ValueError as e:
        if isinstance(e, ModelFormatError):
            raise
        raise ModelFormatError(str(e)) from e


def save_stacking(model: StackingModel, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(stacking_to_dict(model)), encoding="utf-8")
    return path


def load_stacking(path: Path) -> StackingModel:
    return stacking_from_dict(read_document(path))
