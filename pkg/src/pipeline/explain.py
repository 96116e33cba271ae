"""Explain stage: SHAP, LIME, partial dependence and permutation importance artifacts."""

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.config import settings
from src.data.container import read_container
from src.ensemble.stacking import BASE_NAMES, COMPONENTS, StackingModel, load_stacking
from src.evaluation.reporting import write_csv
from src.explain.lime import lime_explain
from src.explain.pdp import pdp
from src.explain.permutation import permutation_importance
from src.explain.summary import rank_by_mean_abs, shap_distribution, summary_frame
from src.explain.tree_shap import ShapValues, shap_matrix
from src.gbdt.model import GBDTModel
from src.gbdt.persistence import load_model
from src.pipeline.artifacts import ArtifactLayout, require, write_json
from src.pipeline.run_config import RunConfig
from src.pipeline.train import shap_rows
from src.utils.errors import stage
from src.utils.logger import app_logger as logger

METHODS = ("shap", "lime", "pdp", "pfi")
SHAP_MODELS = ("selection",) + COMPONENTS


@dataclass(frozen=True)
class ExplainData:
    """Test and training rows, both restricted to the stack's selected features."""

    model: StackingModel
    X_test: np.ndarray
    y_test: np.ndarray
    X_train: np.ndarray
    all_test: np.ndarray
    all_names: List[str]


def load_explain_data(layout: ArtifactLayout) -> ExplainData:
    model = load_stacking(require(layout.stacking_model, "train"))
    test, _ = read_container(require(layout.test_data, "prepare"))
    train, _ = read_container(require(layout.train_data, "prepare"))
    names = test.feature_names
    all_test = test.to_matrix(names)
    return ExplainData(
        model=model,
        X_test=model.align(all_test, names),
        y_test=test.labels(),
        X_train=model.align(train.to_matrix(train.feature_names), train.feature_names),
        all_test=all_test,
        all_names=names,
    )


def _check_rows(rows: Sequence[int], n_rows: int) -> List[int]:
    bad = [r for r in rows if not 0 <= r < n_rows]
    if bad:
        raise ValueError(f"row indices {bad} outside the test set (0..{n_rows - 1})")
    return list(rows)


def _safe_name(feature: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in feature)


def shap_target(data: ExplainData, layout: ArtifactLayout, which: str) -> Tuple[GBDTModel, np.ndarray]:
    """The model to attribute and the rows in its input space."""
    if which == "selection":
        return load_model(require(layout.selection_model, "train")), data.all_test
    if which == "meta":
        return data.model.meta_model, data.model.base_probabilities(data.X_test)
    if which in BASE_NAMES:
        return data.model.component(which), data.X_test
    raise ValueError(f"unknown model {which!r}; expected one of {SHAP_MODELS}")


def explain_shap(data: ExplainData, layout: ArtifactLayout, which: str, rows: Sequence[int],
                 summary: bool, top_k: int, seed: int, max_workers: Optional[int]) -> List[Path]:
    model, X = shap_target(data, layout, which)
    out_dir = layout.explain_dir
    written: List[Path] = []
    if summary:
        sample = X[shap_rows(len(X), settings.shap_max_rows, seed)]
        phi, _ = shap_matrix(model, sample, max_workers=max_workers)
        ranking = rank_by_mean_abs(phi, model.feature_names)
        written.append(write_csv(summary_frame(ranking[:top_k]), out_dir / "shap_summary.csv"))
        written.append(write_csv(shap_distribution(phi, sample, model.feature_names),
                                 out_dir / "shap_distribution.csv"))
    for row in _check_rows(rows, len(X)):
        phi, base_value = shap_matrix(model, X[row:row + 1])
        values = ShapValues(phi[0], base_value, model.feature_names)
        doc = {"row": row, "model": which, **values.to_dict()}
        written.append(write_json(doc, out_dir / f"shap_values_{row}.json"))
    return written


def explain_lime(data: ExplainData, layout: ArtifactLayout, rows: Sequence[int], seed: int) -> List[Path]:
    written = []
    for row in _check_rows(rows, len(data.X_test)):
        explanation = lime_explain(
            data.model.predict_proba, data.X_test[row], data.X_train,
            n_samples=settings.lime_samples, kernel_scale=settings.lime_kernel_scale, seed=seed,
            feature_names=data.model.selected_features,
        )
        doc = {"row": row, "label": int(data.y_test[row]), **explanation.to_dict()}
        written.append(write_json(doc, layout.explain_dir / f"lime_{row}.json"))
    return written


def explain_pdp(data: ExplainData, layout: ArtifactLayout, features: Sequence[str]) -> List[Path]:
    names = data.model.selected_features
    written = []
    for feature in features:
        if feature not in names:
            raise ValueError(f"feature {feature!r} is not among the model's selected features")
        curve = pdp(data.model.predict_proba, data.X_test, feature, settings.pdp_grid, names)
        written.append(write_csv(curve.to_frame(), layout.explain_dir / f"pdp_{_safe_name(feature)}.csv"))
    return written


def explain_pfi(data: ExplainData, layout: ArtifactLayout, metric: str, seed: int,
                max_workers: Optional[int]) -> List[Path]:
    result = permutation_importance(
        data.model.predict_proba, data.X_test, data.y_test, metric=metric,
        n_repeats=settings.pfi_repeats, seed=seed, feature_names=data.model.selected_features,
        threshold=data.model.threshold, max_workers=max_workers,
    )
    logger.info(f"Permutation importance baseline {metric}={result.baseline:.4f}")
    return [write_csv(result.ranking(), layout.explain_dir / "pfi.csv")]


def run_explain(
    cfg: RunConfig,
    method: str,
    rows: Sequence[int] = (),
    features: Sequence[str] = (),
    summary: bool = False,
    model_name: str = "selection",
    metric: str = "auc",
    max_workers: Optional[int] = None,
) -> List[Path]:
    """Produce the artifacts of one explanation method.

    Raises:
        StageError: Tagged ``explain:<method>`` on any failure, including feature mismatches
    """
    layout = ArtifactLayout(cfg.output_dir)
    with stage("explain:load"):
        if method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {method!r}")
        data = load_explain_data(layout)

    handlers: dict = {
        "shap": lambda: explain_shap(data, layout, model_name, rows, summary or not rows,
                                     cfg.feature_k, cfg.seed, max_workers),
        "lime": lambda: explain_lime(data, layout, rows or [0], cfg.seed),
        "pdp": lambda: explain_pdp(data, layout, features or list(data.model.selected_features[:1])),
        "pfi": lambda: explain_pfi(data, layout, metric, cfg.seed, max_workers),
    }
    run: Callable[[], List[Path]] = handlers[method]
    with stage(f"explain:{method}"):
        written = run()
    logger.info(f"Wrote {len(written)} {method} artifact(s) to {layout.explain_dir}")
    return written
