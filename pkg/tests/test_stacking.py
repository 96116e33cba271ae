"""Tests for the stacking ensemble."""

import json

import numpy as np
import pytest

from src.ensemble.stacking import (
    BASE_NAMES,
    StackingModel,
    load_stacking,
    out_of_fold_predictions,
    save_stacking,
    stacking_to_dict,
    train_stacking,
)
from src.evaluation.metrics import rank_auc
from src.explain.permutation import permutation_importance
from src.gbdt.config import GBDTConfig, Growth
from src.gbdt.model import GBDTModel
from src.gbdt.persistence import model_to_dict
from src.gbdt.trainer import train
from src.resample.folds import stratified_kfold
from src.resample.smote import SmoteConfig, smote
from src.utils.errors import FeatureMismatchError, ModelFormatError


def small_bases(seed=0):
    return (
        GBDTConfig(n_estimators=10, max_depth=3, growth=Growth.DEPTH_WISE, seed=seed),
        GBDTConfig(n_estimators=10, max_depth=3, growth=Growth.LEAF_WISE, max_leaves=6, seed=seed + 1),
        GBDTConfig(n_estimators=10, max_depth=3, growth=Growth.SYMMETRIC, seed=seed + 2),
    )


META = GBDTConfig(n_estimators=10, max_depth=2, subsample=1.0, colsample_bytree=1.0)


@pytest.fixture
def indexed_data(two_cluster_data):
    """Two-cluster data whose first column is the row index."""
    X, y = two_cluster_data
    return np.column_stack([np.arange(len(y), dtype=np.float64), X]), y


@pytest.fixture(scope="module")
def trained():
    gen = np.random.default_rng(11)
    X = np.vstack([gen.normal(0, 1, (300, 3)), gen.normal(2.0, 1, (60, 3))])
    y = np.array([0] * 300 + [1] * 60)
    result = train_stacking(X, y, small_bases(), META, k=3, seed=5, feature_names=["a", "b", "c"])
    return X, y, result


class TestOutOfFold:
    """Test cases for out-of-fold meta-features."""

    def test_no_validation_row_reaches_training(self, indexed_data):
        X, y = indexed_data
        seen = {}

        def recording_resampler(X_part, y_part, seed):
            seen[seed] = set(X_part[:, 0].astype(int).tolist())
            return X_part, y_part

        folds = stratified_kfold(y, 4, seed=0)
        result = out_of_fold_predictions(X, y, small_bases(), folds, ["row", "a", "b", "c", "d"],
                                         resampler=recording_resampler, seed=10)

        for f, (train_rows, valid_rows) in enumerate(folds):
            assert seen[10 + f].isdisjoint(valid_rows.tolist())
            assert np.array_equal(result.train_rows[f], train_rows)
            assert len(np.intersect1d(result.train_rows[f], valid_rows)) == 0

    def test_every_row_gets_predictions(self, indexed_data):
        X, y = indexed_data
        folds = stratified_kfold(y, 3, seed=1)
        result = out_of_fold_predictions(X, y, small_bases(), folds, [f"c{j}" for j in range(5)])

        assert result.meta_features.shape == (len(y), 3)
        assert np.all((result.meta_features > 0) & (result.meta_features < 1))

    def test_parallel_matches_sequential(self, indexed_data):
        X, y = indexed_data
        folds = stratified_kfold(y, 3, seed=2)
        names = [f"c{j}" for j in range(5)]
        sequential = out_of_fold_predictions(X, y, small_bases(), folds, names)
        parallel = out_of_fold_predictions(X, y, small_bases(), folds, names, max_workers=4)

        assert np.array_equal(sequential.meta_features, parallel.meta_features)

    def test_smote_resampler_only_sees_training_rows(self, indexed_data):
        X, y = indexed_data
        sizes = {}

        def resampler(X_part, y_part, seed):
            X_out, y_out = smote(X_part, y_part, SmoteConfig(seed=seed))
            sizes[seed] = (len(y_part), len(y_out))
            return X_out, y_out

        folds = stratified_kfold(y, 3, seed=3)
        out_of_fold_predictions(X, y, small_bases(), folds, [f"c{j}" for j in range(5)], resampler=resampler)

        for f, (train_rows, _) in enumerate(folds):
            assert sizes[f][0] == len(train_rows)
            assert sizes[f][1] == 2 * int(np.sum(y[train_rows] == 0))


class TestTrainStacking:
    """Test cases for train_stacking."""

    def test_result_shape(self, trained):
        X, y, result = trained

        assert len(result.fold_aucs) == 3
        assert result.meta_oof.shape == (len(y),)
        assert 0 < result.model.threshold < 1
        assert result.model.selected_features == ("a", "b", "c")
        assert all(0.5 < auc <= 1.0 for auc in result.base_oof_aucs)

    def test_threshold_is_f1_optimal_on_validation(self, trained):
        _, y, result = trained
        predicted = result.meta_oof >= result.model.threshold
        tp = np.sum(predicted & (y == 1))
        f1 = 2 * tp / (predicted.sum() + y.sum())

        assert f1 == pytest.approx(result.oof_f1)

    def test_fixed_threshold(self):
        gen = np.random.default_rng(0)
        X = np.vstack([gen.normal(0, 1, (80, 2)), gen.normal(3, 1, (20, 2))])
        y = np.array([0] * 80 + [1] * 20)
        result = train_stacking(X, y, small_bases(), META, k=2, threshold=0.5)

        assert result.model.threshold == 0.5

    def test_separable_data(self):
        gen = np.random.default_rng(1)
        X = np.vstack([gen.normal(0, 0.5, (60, 2)), gen.normal(10, 0.5, (30, 2))])
        y = np.array([0] * 60 + [1] * 30)
        same = GBDTConfig(n_estimators=10, max_depth=2, subsample=1.0, colsample_bytree=1.0)
        result = train_stacking(X, y, (same, same, same), META, k=3)

        meta = result.oof.meta_features
        np.testing.assert_allclose(meta[:, 0], meta[:, 1])
        np.testing.assert_allclose(meta[:, 0], meta[:, 2])
        assert rank_auc(y, result.model.predict_proba(X)) == 1.0

    def test_constant_base_is_ignored_by_meta(self):
        gen = np.random.default_rng(2)
        X = np.vstack([gen.normal(0, 1, (120, 2)), gen.normal(2, 1, (30, 2))])
        y = np.array([0] * 120 + [1] * 30)
        bases = small_bases()[:2] + (GBDTConfig(n_estimators=0),)
        result = train_stacking(X, y, bases, META, k=3)
        importance = permutation_importance(result.model.meta_model.predict_proba, result.oof.meta_features, y)

        assert importance.mean_drop[2] == 0.0

    def test_naive_mode_uses_all_rows(self):
        gen = np.random.default_rng(3)
        X = np.vstack([gen.normal(0, 1, (60, 2)), gen.normal(2, 1, (20, 2))])
        y = np.array([0] * 60 + [1] * 20)
        result = train_stacking(X, y, small_bases(), META, k=2, naive=True)

        assert all(len(rows) == len(y) for rows in result.oof.train_rows)

    def test_wrong_base_count(self):
        with pytest.raises(ValueError):
            train_stacking(np.zeros((4, 1)), np.array([0, 1, 0, 1]), small_bases()[:2], META)


class TestMetaInputs:
    """Test cases for what the meta-learner sees."""

    def test_meta_fit_on_out_of_fold_probabilities(self, trained):
        _, y, result = trained
        meta = result.model.meta_model
        refit = train(result.oof.meta_features, y, META, feature_names=BASE_NAMES)

        assert meta.feature_names == BASE_NAMES
        assert model_to_dict(refit) == model_to_dict(meta)

    def test_output_is_meta_of_base_probabilities(self, trained):
        X, _, result = trained
        base_proba = result.model.base_probabilities(X)

        assert base_proba.shape == (len(X), 3)
        assert np.array_equal(result.model.predict_proba(X), result.model.meta_model.predict_proba(base_proba))

    def test_raw_features_do_not_reach_meta(self, trained):
        _, _, result = trained
        constant_bases = tuple(GBDTModel((), s, GBDTConfig(), ("a", "b", "c")) for s in (-1.0, 0.0, 1.0))
        model = StackingModel(constant_bases, result.model.meta_model, ("a", "b", "c"), 0.5)
        proba = model.predict_proba(np.random.default_rng(3).normal(0.0, 5.0, size=(40, 3)))

        assert np.all(proba == proba[0])


class TestStackingModel:
    """Test cases for prediction and persistence of the stack."""

    def test_deterministic_outputs(self, trained):
        X, _, result = trained
        rows = np.vstack([X[:5], X[:5]])
        proba = result.model.predict_proba(rows)

        assert np.array_equal(proba[:5], proba[5:])
        assert np.all((proba > 0) & (proba < 1))

    def test_row_order(self, trained):
        X, _, result = trained
        order = np.random.default_rng(0).permutation(len(X))
        assert np.array_equal(result.model.predict_proba(X[order]), result.model.predict_proba(X)[order])

    def test_classify_uses_greater_or_equal(self, trained):
        X, _, result = trained
        proba = result.model.predict_proba(X[:1])
        at_threshold = result.model.with_threshold(float(proba[0]))

        assert at_threshold.classify(X[:1]).tolist() == [1]

    def test_align_by_name(self, trained):
        X, _, result = trained
        shuffled = X[:, [2, 0, 1]]
        np.testing.assert_array_equal(
            result.model.predict_proba(shuffled, feature_names=["c", "a", "b"]),
            result.model.predict_proba(X),
        )

    def test_missing_feature(self, trained):
        X, _, result = trained
        with pytest.raises(FeatureMismatchError) as excinfo:
            result.model.predict_proba(X[:, :2], feature_names=["a", "b"])
        assert excinfo.value.missing == ["c"]

    def test_components(self, trained):
        _, _, result = trained
        assert all(result.model.component(name) is base for name, base in zip(BASE_NAMES, result.model.base_models))
        assert result.model.component("meta") is result.model.meta_model
        with pytest.raises(ValueError):
            result.model.component("base4")

    def test_invalid_threshold(self, trained):
        _, _, result = trained
        with pytest.raises(ValueError):
            result.model.with_threshold(1.0)

    def test_round_trip(self, trained, tmp_path):
        X, _, result = trained
        loaded = load_stacking(save_stacking(result.model, tmp_path / "stacking.json"))

        assert loaded.threshold == result.model.threshold
        assert np.array_equal(loaded.predict_proba(X), result.model.predict_proba(X))

    def test_wrong_kind(self, trained, tmp_path):
        _, _, result = trained
        doc = stacking_to_dict(result.model)
        doc["kind"] = "gbdt"
        path = tmp_path / "wrong.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(ModelFormatError):
            load_stacking(path)

    def test_constructor_checks_meta_width(self, trained):
        _, _, result = trained
        narrow_meta = GBDTModel((), 0.0, GBDTConfig(), ("p", "q"))
        with pytest.raises(ValueError):
            StackingModel(result.model.base_models, narrow_meta, ("a", "b", "c"), 0.5)
