"""Hyperparameter search driver and the cross-validated AUC objective."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.evaluation.metrics import rank_auc
from src.gbdt.config import GBDTConfig
from src.gbdt.trainer import train
from src.resample.folds import stratified_kfold
from src.tuning.sampler import STRATEGIES, AdaptiveSampler, random_sequence
from src.tuning.space import Param
from src.utils.logger import app_logger as logger

Objective = Callable[[Dict[str, Any]], float]
Resampler = Callable[[np.ndarray, np.ndarray, int], Tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class Trial:
    index: int
    params: Dict[str, Any]
    score: float
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass(frozen=True)
class TuneResult:
    best_params: Dict[str, Any]
    best_score: float
    trials: Tuple[Trial, ...]

    def to_frame(self) -> pd.DataFrame:
        """``trial, score, <param columns>``; failed trials score -inf."""
        rows = [{"trial": t.index, "score": t.score, **t.params} for t in self.trials]
        return pd.DataFrame(rows)


def _run(objective: Objective, index: int, params: Dict[str, Any]) -> Trial:
    try:
        score = float(objective(params))
        if not math.isfinite(score):
            raise ValueError(f"objective returned {score}")
    except Exception as e:
        logger.warning(f"Trial {index} failed: {e}")
        return Trial(index, params, -math.inf, str(e))
    logger.debug(f"Trial {index}: score={score:.5f} params={params}")
    return Trial(index, params, score)


def tune(
    objective: Objective,
    space: Mapping[str, Param],
    n_trials: int = 20,
    strategy: str = "random",
    seed: int = 0,
    max_workers: Optional[int] = None,
    progress: bool = False,
) -> TuneResult:
    """Search ``space`` for the parameters maximising ``objective``.

    Random search draws its whole sequence first, so trials can run
    concurrently. The adaptive strategy proposes one trial at a time from the
    completed log and therefore runs serially.

    Args:
        objective: Maps a parameter dict to a score (higher is better)
        space: Search space
        n_trials: Number of trials, at least 1
        strategy: ``random`` or ``adaptive``
        seed: Sampler seed
        max_workers: Threads for random search
        progress: Show a progress bar

    Returns:
        TuneResult; ties on score keep the lowest trial index

    Raises:
        ValueError: On bad arguments
        RuntimeError: If every trial failed
    """
    if n_trials < 1:
        raise ValueError(f"n_trials must be at least 1, got {n_trials}")
    if strategy not in STRATEGIES:
        raise ValueError(f"strategy must be one of {STRATEGIES}, got {strategy!r}")

    trials: List[Trial] = []
    if strategy == "random":
        sequence = random_sequence(space, n_trials, seed)
        if max_workers and max_workers > 1:
            with ThreadPoolExecutor(max_workers=max_workers) as executor:
                futures = executor.map(lambda job: _run(objective, *job), enumerate(sequence))
                trials = list(tqdm(futures, total=n_trials, desc="tuning", disable=not progress))
        else:
            for index, params in enumerate(tqdm(sequence, desc="tuning", disable=not progress)):
                trials.append(_run(objective, index, params))
    else:
        if max_workers and max_workers > 1:
            logger.warning("Adaptive search runs trials serially; --jobs is ignored for tuning")
        sampler = AdaptiveSampler(space, n_trials, seed)
        for index in tqdm(range(n_trials), desc="tuning", disable=not progress):
            trials.append(_run(objective, index, sampler.propose(trials)))

    completed = [t for t in trials if not t.failed]
    if not completed:
        raise RuntimeError(f"all {n_trials} tuning trials failed; last error: {trials[-1].error}")
    best = max(completed, key=lambda t: (t.score, -t.index))
    logger.info(f"Best trial {best.index}/{n_trials}: score={best.score:.5f} params={best.params}")
    return TuneResult(dict(best.params), best.score, tuple(trials))


def write_trial_log(result: TuneResult, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    result.to_frame().to_csv(path, index=False, lineterminator="\n", float_format="%.17g")
    return path


def apply_params(base: GBDTConfig, params: Mapping[str, Any]) -> GBDTConfig:
    """Validated copy of ``base`` with the tuned parameters replaced."""
    return GBDTConfig(**{**base.model_dump(), **params})


def cv_auc_objective(
    X: np.ndarray,
    y: np.ndarray,
    base: GBDTConfig,
    k: int = 5,
    seed: int = 0,
    resampler: Optional[Resampler] = None,
) -> Objective:
    """Objective returning mean validation AUC over stratified folds of (X, y).

    Resampling, when given, is applied to each training part only.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).astype(np.int64)
    folds = stratified_kfold(y, k, seed)

    def objective(params: Dict[str, Any]) -> float:
        cfg = apply_params(base, params)
        aucs = []
        for f, (train_rows, valid_rows) in enumerate(folds):
            X_train, y_train = X[train_rows], y[train_rows]
            if resampler is not None:
                X_train, y_train = resampler(X_train, y_train, seed + f)
            model = train(X_train, y_train, cfg)
            aucs.append(rank_auc(y[valid_rows], model.predict_proba(X[valid_rows])))
        return float(np.mean(aucs))

    return objective
