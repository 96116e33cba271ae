"""Tests for search spaces, samplers and the tuning driver."""

import math

import numpy as np
import pandas as pd
import pytest

from src.gbdt.config import GBDTConfig, Growth
from src.tuning.sampler import AdaptiveSampler, random_sequence
from src.tuning.space import Choice, FloatRange, IntRange, LogFloatRange, default_space, in_space, sample_params
from src.tuning.tuner import Trial, apply_params, cv_auc_objective, tune, write_trial_log

PARABOLA_SPACE = {"x": FloatRange(0.0, 10.0)}


def parabola(params):
    return -(params["x"] - 3.0) ** 2


class TestSearchSpace:
    """Test cases for parameter ranges."""

    def test_default_parameters(self):
        assert set(default_space()) == {
            "n_estimators", "max_depth", "learning_rate", "subsample", "colsample_bytree", "scale_pos_weight",
        }

    def test_samples_stay_in_range(self):
        space = default_space()
        rng = np.random.default_rng(0)
        for _ in range(1000):
            assert in_space(space, sample_params(space, rng))

    def test_samples_are_valid_configs(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            cfg = apply_params(GBDTConfig(), sample_params(default_space(), rng))
            assert 0 < cfg.subsample <= 1 and cfg.n_estimators >= 100

    def test_log_range_round_trip(self):
        param = LogFloatRange(0.01, 0.3)
        assert param.from_unit(param.to_unit(0.05)) == pytest.approx(0.05)
        assert param.from_unit(0.0) == pytest.approx(0.01)

    def test_int_range_inclusive(self):
        rng = np.random.default_rng(2)
        values = {IntRange(1, 3).sample(rng) for _ in range(200)}
        assert values == {1, 2, 3}

    def test_bad_bounds(self):
        with pytest.raises(ValueError):
            FloatRange(1.0, 1.0)
        with pytest.raises(ValueError):
            LogFloatRange(0.0, 1.0)
        with pytest.raises(ValueError):
            Choice(())


class TestTune:
    """Test cases for the tuning driver."""

    def test_constant_objective_keeps_first_trial(self):
        result = tune(lambda params: 1.0, default_space(), n_trials=6, seed=3)
        assert result.best_params == result.trials[0].params

    def test_random_search_finds_parabola_peak(self):
        result = tune(parabola, PARABOLA_SPACE, n_trials=50, strategy="random", seed=42)
        assert abs(result.best_params["x"] - 3.0) < 1.0

    def test_adaptive_search_finds_parabola_peak(self):
        result = tune(parabola, PARABOLA_SPACE, n_trials=40, strategy="adaptive", seed=7)
        assert abs(result.best_params["x"] - 3.0) < 1.0
        assert all(in_space(PARABOLA_SPACE, t.params) for t in result.trials)

    def test_failed_trials_score_negative_infinity(self):
        def objective(params):
            if params["x"] > 5.0:
                raise RuntimeError("diverged")
            return params["x"]

        result = tune(objective, PARABOLA_SPACE, n_trials=20, seed=0)
        failed = [t for t in result.trials if t.failed]

        assert failed
        assert all(t.score == -math.inf for t in failed)
        assert result.best_params["x"] <= 5.0

    def test_non_finite_score_is_a_failure(self):
        result = tune(lambda p: float("nan") if p["x"] > 5 else 0.0, PARABOLA_SPACE, n_trials=10, seed=1)
        assert all(t.failed for t in result.trials if t.params["x"] > 5)

    def test_all_failing(self):
        def objective(params):
            raise ValueError("bad")

        with pytest.raises(RuntimeError):
            tune(objective, PARABOLA_SPACE, n_trials=3)

    def test_same_seed_same_sequence(self):
        assert random_sequence(default_space(), 5, 9) == random_sequence(default_space(), 5, 9)

    def test_parallel_random_search(self):
        sequential = tune(parabola, PARABOLA_SPACE, n_trials=12, seed=5)
        parallel = tune(parabola, PARABOLA_SPACE, n_trials=12, seed=5, max_workers=4)

        assert [t.params for t in sequential.trials] == [t.params for t in parallel.trials]
        assert sequential.best_score == parallel.best_score

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            tune(parabola, PARABOLA_SPACE, n_trials=0)
        with pytest.raises(ValueError):
            tune(parabola, PARABOLA_SPACE, strategy="grid")

    def test_trial_log(self, tmp_path):
        result = tune(parabola, PARABOLA_SPACE, n_trials=4, seed=0)
        frame = pd.read_csv(write_trial_log(result, tmp_path / "trials.csv"))

        assert list(frame.columns) == ["trial", "score", "x"]
        assert frame["trial"].tolist() == [0, 1, 2, 3]


class TestAdaptiveSampler:
    """Test cases for the adaptive proposal rule."""

    def test_startup_is_random(self):
        sampler = AdaptiveSampler(PARABOLA_SPACE, n_trials=20, seed=0)
        proposal = sampler.propose([])
        assert in_space(PARABOLA_SPACE, proposal)

    def test_categorical_parameters(self):
        space = {"growth": Choice(("depth_wise", "leaf_wise")), "x": FloatRange(0.0, 1.0)}
        history = [
            Trial(i, {"growth": "leaf_wise" if i % 2 else "depth_wise", "x": i / 10}, float(i % 2))
            for i in range(10)
        ]
        proposal = AdaptiveSampler(space, n_trials=20, seed=1).propose(history)
        assert in_space(space, proposal)


class TestObjective:
    """Test cases for the cross-validated AUC objective."""

    def test_apply_params_validates(self):
        with pytest.raises(ValueError):
            apply_params(GBDTConfig(), {"subsample": 1.5})

    def test_apply_params_keeps_other_fields(self):
        base = GBDTConfig(growth=Growth.SYMMETRIC, seed=9)
        cfg = apply_params(base, {"max_depth": 4})

        assert cfg.growth == Growth.SYMMETRIC and cfg.seed == 9 and cfg.max_depth == 4

    def test_cv_auc(self, two_cluster_data):
        X, y = two_cluster_data
        objective = cv_auc_objective(X, y, GBDTConfig(n_estimators=5, max_depth=3), k=3, seed=0)
        score = objective({"max_depth": 2, "learning_rate": 0.2})

        assert 0.7 < score <= 1.0
        assert objective({"max_depth": 2, "learning_rate": 0.2}) == score
