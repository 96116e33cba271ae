"""Train stage: SHAP feature selection, optional tuning, stacking and baselines."""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.baselines.decision_tree import train_decision_tree
from src.baselines.logistic import LinearModel, save_linear, train_logreg
from src.config import settings
from src.data.container import read_container, write_container
from src.data.schema import ColumnKind, Schema
from src.data.table import Table
from src.ensemble.stacking import (
    BASE_NAMES,
    Resampler,
    StackingResult,
    out_of_fold_predictions,
    save_stacking,
    train_stacking,
)
from src.evaluation.reporting import write_csv
from src.explain.summary import Ranking, rank_by_mean_abs, select_top_k
from src.explain.tree_shap import shap_matrix
from src.gbdt.config import GBDTConfig
from src.gbdt.model import GBDTModel
from src.gbdt.persistence import save_model
from src.gbdt.trainer import train
from src.pipeline.artifacts import ArtifactLayout, require, write_json
from src.pipeline.run_config import RunConfig, SmoteSettings
from src.resample.folds import stratified_kfold
from src.resample.smote import SmoteConfig, class_counts, smote
from src.tuning.space import default_space
from src.tuning.tuner import TuneResult, apply_params, cv_auc_objective, tune, write_trial_log
from src.utils.errors import stage
from src.utils.logger import app_logger as logger


@dataclass(frozen=True)
class TrainingOutcome:
    stacking: StackingResult
    selection_model: GBDTModel
    ranking: Ranking
    selected: List[str]
    base_configs: Tuple[GBDTConfig, ...]
    meta_config: GBDTConfig
    tuning: Optional[TuneResult]
    logreg: Optional[LinearModel]
    decision_tree: Optional[GBDTModel]
    layout: ArtifactLayout


def make_resampler(settings_: SmoteSettings, max_workers: Optional[int] = None) -> Resampler:
    """SMOTE bound to the run's settings; the seed varies per call site."""

    def resample(X: np.ndarray, y: np.ndarray, seed: int) -> Tuple[np.ndarray, np.ndarray]:
        cfg = SmoteConfig(k_neighbors=settings_.k_neighbors, target_ratio=settings_.target_ratio,
                          seed=seed, scaled=settings_.scaled)
        return smote(X, y, cfg, max_workers=max_workers)

    return resample


def load_training_matrix(layout: ArtifactLayout) -> Tuple[np.ndarray, np.ndarray, List[str], Table, bool]:
    """Training matrix, labels, feature names, table, and whether prepare already balanced it."""
    table, metadata = read_container(require(layout.train_data, "prepare"))
    names = table.feature_names
    pre_balanced = bool(metadata.get("pre_balanced", False))
    return table.to_matrix(names), table.labels(), names, table, pre_balanced


def shap_rows(n_rows: int, max_rows: int, seed: int) -> np.ndarray:
    """Sorted subsample of row indices used for SHAP summaries."""
    if n_rows <= max_rows:
        return np.arange(n_rows)
    return np.sort(np.random.default_rng(seed).choice(n_rows, size=max_rows, replace=False))


def select_features(X: np.ndarray, y: np.ndarray, names: Sequence[str], cfg: GBDTConfig, k: int,
                    seed: int, max_workers: Optional[int] = None) -> Tuple[GBDTModel, Ranking, List[str]]:
    """Train a selection model and keep the k features with the largest mean |SHAP|."""
    model = train(X, y, cfg, feature_names=names)
    rows = shap_rows(len(X), settings.shap_max_rows, seed)
    phi, _ = shap_matrix(model, X[rows], max_workers=max_workers)
    ranking = rank_by_mean_abs(phi, names)
    if k > len(names):
        logger.warning(f"feature_k={k} exceeds the {len(names)} available features; keeping all")
        k = len(names)
    selected = select_top_k(ranking, k)
    logger.info(f"Selected {len(selected)} features; top 5: {selected[:5]}")
    return model, ranking, selected


def tune_target(
    cfg: RunConfig,
    X: np.ndarray,
    y: np.ndarray,
    names: Sequence[str],
    bases: List[GBDTConfig],
    meta: GBDTConfig,
    resampler: Optional[Resampler],
    max_workers: Optional[int],
    progress: bool,
) -> Tuple[List[GBDTConfig], GBDTConfig, TuneResult]:
    """Tune the configured component and return the updated configs."""
    target = cfg.tuning.target
    if target == "meta":
        folds = stratified_kfold(y, cfg.folds, cfg.seed)
        oof = out_of_fold_predictions(X, y, bases, folds, names, resampler, cfg.seed, max_workers)
        objective = cv_auc_objective(oof.meta_features, y, meta, cfg.tuning.folds, cfg.seed)
    else:
        index = BASE_NAMES.index(target)
        objective = cv_auc_objective(X, y, bases[index], cfg.tuning.folds, cfg.seed, resampler)

    logger.info(f"Tuning {target}: {cfg.tuning.trials} {cfg.tuning.strategy} trials")
    result = tune(objective, default_space(), cfg.tuning.trials, cfg.tuning.strategy, cfg.seed,
                  max_workers=max_workers, progress=progress)
    if target == "meta":
        meta = apply_params(meta, result.best_params)
    else:
        bases = list(bases)
        bases[index] = apply_params(bases[index], result.best_params)
    return bases, meta, result


def _class_balance_frame(before: Dict[int, int], after: Dict[int, int]) -> pd.DataFrame:
    rows = [("before_smote", label, count) for label, count in before.items()]
    rows += [("after_smote", label, count) for label, count in after.items()]
    return pd.DataFrame(rows, columns=["stage", "label", "count"])


def _training_summary(cfg: RunConfig, outcome_parts: Dict[str, Any]) -> Dict[str, Any]:
    result: StackingResult = outcome_parts["stacking"]
    fold_aucs = list(result.fold_aucs)
    tuning: Optional[TuneResult] = outcome_parts["tuning"]
    return {
        "seed": cfg.seed,
        "n_train_rows": outcome_parts["n_rows"],
        "class_counts": {str(k): v for k, v in outcome_parts["before"].items()},
        "balanced_class_counts": {str(k): v for k, v in outcome_parts["after"].items()},
        "selected_features": outcome_parts["selected"],
        "threshold_policy": cfg.threshold,
        "threshold": result.model.threshold,
        "oof_best_f1": result.oof_f1,
        "cv_auc": {
            "folds": fold_aucs,
            "mean": float(np.mean(fold_aucs)),
            "spread": float(max(fold_aucs) - min(fold_aucs)),
        },
        "base_oof_auc": dict(zip(BASE_NAMES, result.base_oof_aucs)),
        "base_configs": [c.to_document() for c in outcome_parts["bases"]],
        "meta_config": outcome_parts["meta"].to_document(),
        "tuning": None if tuning is None else {
            "target": cfg.tuning.target,
            "strategy": cfg.tuning.strategy,
            "trials": len(tuning.trials),
            "best_score": tuning.best_score,
            "best_params": tuning.best_params,
        },
        "smote": cfg.smote.model_dump(),
        "naive_stacking": cfg.naive_stacking,
        "smote_before_split": cfg.smote_before_split,
    }


def run_train(cfg: RunConfig, max_workers: Optional[int] = None, skip_tune: bool = False,
              progress: bool = False) -> TrainingOutcome:
    """Fit every model of the run and write their documents.

    Raises:
        StageError: Tagged ``train:<step>`` on any failure
    """
    layout = ArtifactLayout(cfg.output_dir)

    with stage("train:load"):
        X_all, y, names, train_table, pre_balanced = load_training_matrix(layout)
        target = train_table.schema.target
        before = class_counts(y)
        logger.info(f"Training on {len(y)} rows x {len(names)} features, classes {before}")
        use_smote = cfg.smote.enabled and not pre_balanced
        resampler = make_resampler(cfg.smote, max_workers) if use_smote else None

    with stage("train:selection"):
        X_sel, y_sel = X_all, y
        if resampler is not None and cfg.smote.before_selection:
            X_sel, y_sel = resampler(X_all, y, cfg.seed)
        selection_model, ranking, selected = select_features(
            X_sel, y_sel, names, cfg.base_configs[0], cfg.feature_k, cfg.seed, max_workers
        )
        X = X_all[:, [names.index(name) for name in selected]]

    bases = list(cfg.base_configs)
    meta = cfg.meta_config
    tuning: Optional[TuneResult] = None
    if cfg.tuning.enabled and not skip_tune:
        with stage("train:tune"):
            bases, meta, tuning = tune_target(cfg, X, y, selected, bases, meta, resampler, max_workers, progress)
            write_trial_log(tuning, layout.trials)
    else:
        logger.info("Tuning skipped; using configured hyperparameters")

    with stage("train:stacking"):
        result = train_stacking(
            X, y, bases, meta,
            k=cfg.folds,
            seed=cfg.seed,
            feature_names=selected,
            resampler=resampler,
            naive=cfg.naive_stacking,
            threshold=cfg.threshold_policy,
            max_workers=max_workers,
            progress=progress,
        )

    with stage("train:balance"):
        # Same seed as the stack's final refit, so this is the data the bases saw.
        X_bal, y_bal = resampler(X, y, cfg.seed + cfg.folds) if resampler is not None else (X, y)
        after = class_counts(y_bal)
        schema = Schema.of([(name, ColumnKind.NUMERIC) for name in selected] + [(target, ColumnKind.TARGET)])
        data = {name: X_bal[:, j] for j, name in enumerate(selected)}
        data[target] = y_bal.astype(np.float64)
        balanced = Table.from_arrays(schema, data)
        write_container(balanced, layout.balanced_train_data, {"seed": cfg.seed, "part": "balanced_train"})

    logreg: Optional[LinearModel] = None
    tree: Optional[GBDTModel] = None
    if cfg.baselines.enabled:
        with stage("train:baselines"):
            X_base, y_base = (X_bal, y_bal) if cfg.baselines.smote else (X, y)
            logreg = train_logreg(X_base, y_base, cfg.baselines.logreg_l2, cfg.baselines.logreg_max_iters,
                                  cfg.baselines.logreg_tol, feature_names=selected)
            tree = train_decision_tree(X_base, y_base, cfg.baselines.tree_max_depth,
                                       feature_names=selected, seed=cfg.seed)

    with stage("train:write"):
        save_stacking(result.model, layout.stacking_model)
        save_model(selection_model, layout.selection_model)
        if logreg is not None:
            save_linear(logreg, layout.logreg_model)
        if tree is not None:
            save_model(tree, layout.tree_model)
        write_csv(pd.DataFrame({"fold": range(len(result.fold_aucs)), "auc": result.fold_aucs}), layout.cv_auc)
        write_csv(_class_balance_frame(before, after), layout.class_balance)
        write_json(_training_summary(cfg, {
            "stacking": result, "tuning": tuning, "n_rows": len(y), "before": before, "after": after,
            "selected": selected, "bases": bases, "meta": meta,
        }), layout.training_summary)

    logger.info(f"Stacking model written to {layout.stacking_model} (threshold {result.model.threshold:.4f})")
    return TrainingOutcome(result, selection_model, ranking, selected, tuple(bases), meta,
                           tuning, logreg, tree, layout)


def run_tune(cfg: RunConfig, max_workers: Optional[int] = None, progress: bool = False) -> TuneResult:
    """Standalone search on the selected features; writes the trial log only."""
    layout = ArtifactLayout(cfg.output_dir)
    with stage("tune:load"):
        X_all, y, names, _, pre_balanced = load_training_matrix(layout)
        resampler = make_resampler(cfg.smote, max_workers) if cfg.smote.enabled and not pre_balanced else None
    with stage("tune:selection"):
        _, _, selected = select_features(X_all, y, names, cfg.base_configs[0], cfg.feature_k, cfg.seed, max_workers)
        X = X_all[:, [names.index(name) for name in selected]]
    with stage("tune:search"):
        _, _, result = tune_target(cfg, X, y, selected, list(cfg.base_configs), cfg.meta_config,
                                   resampler, max_workers, progress)
        write_trial_log(result, layout.trials)
    return result
