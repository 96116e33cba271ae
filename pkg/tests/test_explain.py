"""Tests for TreeSHAP, the exact Shapley oracle, LIME, partial dependence and permutation importance."""

import numpy as np
import pytest

from src.explain.lime import lime_explain, perturb, weighted_r2
from src.explain.oracle import exact_shapley_oracle
from src.explain.pdp import pdp, quantile_grid
from src.explain.permutation import permutation_importance
from src.explain.summary import rank_by_mean_abs, select_top_k, shap_distribution, shap_summary, summary_frame
from src.explain.tree_shap import shap_matrix, tree_shap
from src.gbdt.config import GBDTConfig, Growth
from src.gbdt.model import GBDTModel
from src.gbdt.trainer import train
from src.gbdt.tree import TreeNode


def random_tree(gen: np.random.Generator, n_features: int, max_leaves: int) -> TreeNode:
    """Random tree with at most ``max_leaves`` leaves; features may repeat on a path."""

    def build(budget: int, depth: int) -> TreeNode:
        if budget <= 1 or depth >= 4 or gen.random() < 0.2:
            return TreeNode.leaf(float(gen.normal()), float(gen.uniform(0.5, 5.0)))
        left_budget = int(gen.integers(1, budget))
        return TreeNode.split(
            int(gen.integers(n_features)),
            float(np.round(gen.normal(), 2)),
            build(left_budget, depth + 1),
            build(budget - left_budget, depth + 1),
        )

    return build(max_leaves, 0)


def random_model(seed: int) -> GBDTModel:
    gen = np.random.default_rng(seed)
    n_features = int(gen.integers(1, 7))
    n_trees = int(gen.integers(1, 6))
    trees = tuple(random_tree(gen, n_features, int(gen.integers(1, 11))) for _ in range(n_trees))
    names = tuple(f"f{j}" for j in range(n_features))
    return GBDTModel(trees, float(gen.normal()), GBDTConfig(), names)


class TestTreeShap:
    """Test cases for TreeSHAP."""

    def test_stump(self, stump_model):
        values = tree_shap(stump_model, np.array([7.0, 0.0]))

        assert values.phi[0] == pytest.approx(2.25)
        assert values.phi[1] == 0.0
        assert values.base_value == pytest.approx(-0.25)

    def test_single_leaf(self):
        model = GBDTModel((TreeNode.leaf(0.4, 10.0),), 0.1, GBDTConfig(), ("a", "b"))
        values = tree_shap(model, np.array([3.0, -1.0]))

        assert values.phi.tolist() == [0.0, 0.0]
        assert values.base_value == pytest.approx(0.5)

    @pytest.mark.parametrize("seed", range(200))
    def test_matches_exact_oracle(self, seed):
        model = random_model(seed)
        x = np.round(np.random.default_rng(seed + 10_000).normal(size=model.n_features), 2)
        fast = tree_shap(model, x)
        exact = exact_shapley_oracle(model, x)

        np.testing.assert_allclose(fast.phi, exact.phi, atol=1e-9)
        assert fast.base_value == pytest.approx(exact.base_value, abs=1e-9)

    @pytest.mark.parametrize("growth", list(Growth))
    def test_local_accuracy_on_trained_model(self, two_cluster_data, growth):
        X, y = two_cluster_data
        model = train(X, y, GBDTConfig(n_estimators=20, max_depth=4, growth=growth, seed=2))
        rows = np.random.default_rng(6).normal(0.0, 2.0, size=(100, X.shape[1]))
        phi, base = shap_matrix(model, rows)

        np.testing.assert_allclose(base + phi.sum(axis=1), model.predict_margin(rows), atol=1e-6)

    def test_additive_over_trees(self, two_cluster_data):
        X, y = two_cluster_data
        model = train(X, y, GBDTConfig(n_estimators=8, max_depth=3, seed=4))
        rows = X[:30]
        phi, base = shap_matrix(model, rows)
        leaf_values = model.tree_values(rows)

        phi_sum = np.zeros_like(phi)
        base_sum = model.base_score
        for t, tree in enumerate(model.trees):
            single = GBDTModel((tree,), 0.0, model.config, model.feature_names)
            tree_phi, tree_base = shap_matrix(single, rows)
            np.testing.assert_allclose(tree_base + tree_phi.sum(axis=1), leaf_values[:, t], atol=1e-9)
            phi_sum += tree_phi
            base_sum += tree_base

        np.testing.assert_allclose(phi_sum, phi, atol=1e-9)
        assert base_sum == pytest.approx(base, abs=1e-9)

    def test_parallel_chunks_match(self, two_cluster_data):
        X, y = two_cluster_data
        model = train(X, y, GBDTConfig(n_estimators=5, max_depth=3, seed=0))
        sequential, _ = shap_matrix(model, X[:100])
        parallel, _ = shap_matrix(model, X[:100], max_workers=4, chunk_size=7)

        assert np.array_equal(sequential, parallel)

    def test_symmetric_duplicate_features(self):
        def stump(feature):
            return TreeNode.split(feature, 0.0, TreeNode.leaf(-1.0, 2.0), TreeNode.leaf(1.0, 2.0))

        model = GBDTModel((stump(0), stump(1)), 0.0, GBDTConfig(), ("a", "a_copy"))
        values = tree_shap(model, np.array([1.0, 1.0]))

        assert values.phi[0] == pytest.approx(values.phi[1])
        assert values.prediction == pytest.approx(2.0)

    def test_width_mismatch(self, stump_model):
        with pytest.raises(ValueError):
            tree_shap(stump_model, np.array([1.0, 2.0, 3.0]))

    def test_to_dict(self, stump_model):
        doc = tree_shap(stump_model, np.array([7.0, 0.0])).to_dict()

        assert doc["phi"]["f0"] == pytest.approx(2.25)
        assert doc["prediction_margin"] == pytest.approx(2.0)


class TestOracle:
    """Test cases for the exact Shapley oracle."""

    def test_single_feature(self):
        tree = TreeNode.split(0, 1.0, TreeNode.leaf(0.3, 1.0), TreeNode.leaf(-0.7, 4.0))
        model = GBDTModel((tree,), 0.2, GBDTConfig(), ("x",))
        values = exact_shapley_oracle(model, np.array([0.0]))

        assert values.phi[0] == pytest.approx(model.predict_margin(np.array([0.0])) - values.base_value)

    def test_efficiency(self):
        model = random_model(3)
        x = np.zeros(model.n_features)
        values = exact_shapley_oracle(model, x)

        assert values.prediction == pytest.approx(model.predict_margin(x))

    def test_background_reweights_nodes(self, stump_model):
        background = np.array([[0.0, 0.0], [9.0, 0.0]])
        values = exact_shapley_oracle(stump_model, np.array([7.0, 0.0]), background=background)

        assert values.base_value == pytest.approx(0.5)
        assert values.phi[0] == pytest.approx(1.5)

    def test_too_many_features(self):
        model = GBDTModel((TreeNode.leaf(0.0, 1.0),), 0.0, GBDTConfig(), tuple(f"f{j}" for j in range(13)))
        with pytest.raises(ValueError):
            exact_shapley_oracle(model, np.zeros(13))


class TestShapSummary:
    """Test cases for the global ranking and top-k selection."""

    def test_unused_feature_ranks_last(self, stump_model):
        X = np.array([[1.0, 5.0], [7.0, -2.0], [3.0, 0.0]])
        ranking = shap_summary(stump_model, X)

        assert ranking[-1] == ("f1", 0.0)
        assert ranking[0][0] == "f0"

    def test_duplicated_rows_keep_ranking(self, two_cluster_data):
        X, y = two_cluster_data
        model = train(X, y, GBDTConfig(n_estimators=5, max_depth=3, seed=0))
        once = shap_summary(model, X[:40])
        twice = shap_summary(model, np.vstack([X[:40], X[:40]]))

        assert [name for name, _ in once] == [name for name, _ in twice]
        np.testing.assert_allclose([s for _, s in once], [s for _, s in twice], rtol=1e-12)

    def test_ties_keep_feature_order(self):
        ranking = rank_by_mean_abs(np.zeros((3, 3)), ["c", "a", "b"])
        assert [name for name, _ in ranking] == ["c", "a", "b"]

    def test_select_top_k(self):
        ranking = [("a", 3.0), ("b", 2.0), ("c", 1.0)]

        assert select_top_k(ranking, 1) == ["a"]
        assert select_top_k(ranking, 3) == ["a", "b", "c"]
        with pytest.raises(ValueError):
            select_top_k(ranking, 4)
        with pytest.raises(ValueError):
            select_top_k(ranking, 0)

    def test_summary_frame(self):
        frame = summary_frame([("a", 3.0), ("b", 2.0)])
        assert list(frame.columns) == ["feature", "mean_abs_shap", "rank"]
        assert frame["rank"].tolist() == [1, 2]

    def test_distribution_direction(self):
        X = np.array([[0.0], [1.0], [2.0]])
        phi = np.array([[-1.0], [0.0], [1.0]])
        frame = shap_distribution(phi, X, ["x"])

        assert frame.loc[0, "value_correlation"] == pytest.approx(1.0)
        assert frame.loc[0, "max"] == 1.0


class TestLime:
    """Test cases for the local surrogate."""

    @pytest.fixture
    def background(self):
        return np.random.default_rng(0).normal(size=(500, 3))

    def test_constant_model(self, background):
        explanation = lime_explain(lambda Z: np.full(len(Z), 0.3), np.zeros(3), background, n_samples=500)

        np.testing.assert_allclose(explanation.weights, 0.0, atol=1e-8)
        assert explanation.intercept == pytest.approx(0.3)
        assert 0.0 <= explanation.local_r2 <= 1.0

    def test_single_driving_feature(self, background):
        def model(Z):
            return 1.0 / (1.0 + np.exp(-2.0 * Z[:, 1]))

        explanation = lime_explain(model, np.zeros(3), background, n_samples=5000, seed=1)

        assert explanation.weights[1] > 0.1
        assert abs(explanation.weights[0]) < 0.05
        assert abs(explanation.weights[2]) < 0.05
        assert explanation.top_features(1)[0]["feature"] == "f1"
        assert explanation.top_features(1)[0]["direction"] == "toward_fraud"
        assert explanation.predicted_proba == pytest.approx(0.5)

    def test_deterministic(self, background):
        def model(Z):
            return 1.0 / (1.0 + np.exp(-Z.sum(axis=1)))

        first = lime_explain(model, background[0], background, n_samples=300, seed=4)
        second = lime_explain(model, background[0], background, n_samples=300, seed=4)
        assert np.array_equal(first.weights, second.weights)

    def test_first_sample_is_the_row(self, background):
        samples = perturb(background[3], background, 50, np.random.default_rng(0))
        assert np.array_equal(samples[0], background[3])

    def test_kernel_width(self, background):
        def constant(Z):
            return np.full(len(Z), 0.1)

        default = lime_explain(constant, np.zeros(3), background, n_samples=50)
        scaled = lime_explain(constant, np.zeros(3), background, n_samples=50, kernel_scale=1.5)
        explicit = lime_explain(constant, np.zeros(3), background, n_samples=50, kernel_scale=1.5, kernel_width=2.0)

        assert default.kernel_width == pytest.approx(0.75 * np.sqrt(3))
        assert scaled.kernel_width == pytest.approx(1.5 * np.sqrt(3))
        assert explicit.kernel_width == 2.0

    def test_too_few_samples(self, background):
        with pytest.raises(ValueError):
            lime_explain(lambda Z: np.zeros(len(Z)), np.zeros(3), background, n_samples=4)

    def test_report_shape(self, background):
        doc = lime_explain(lambda Z: np.full(len(Z), 0.02), np.zeros(3), background, n_samples=100,
                           feature_names=["amt", "card", "addr"]).to_dict(top=2)

        assert doc["predicted_proba"]["legit"] == pytest.approx(0.98)
        assert len(doc["top_features"]) == 2
        assert set(doc["weights"]) == {"amt", "card", "addr"}

    def test_weighted_r2(self):
        y = np.array([0.0, 1.0, 2.0])
        assert weighted_r2(y, y, np.ones(3)) == 1.0
        assert weighted_r2(y, np.full(3, 1.0), np.ones(3)) == 0.0


class TestPartialDependence:
    """Test cases for partial dependence curves."""

    @pytest.fixture
    def uniform_rows(self):
        return np.random.default_rng(2).uniform(0.0, 1.0, size=(200, 2))

    def test_step_function(self, uniform_rows):
        curve = pdp(lambda Z: (Z[:, 0] > 0.5).astype(float), uniform_rows, 0, n_grid=21)

        expected = (curve.grid > 0.5).astype(float)
        np.testing.assert_array_equal(curve.mean_prediction, expected)
        assert curve.mean_prediction[0] == 0.0 and curve.mean_prediction[-1] == 1.0

    def test_constant_model(self, uniform_rows):
        curve = pdp(lambda Z: np.full(len(Z), 0.2), uniform_rows, 1)
        np.testing.assert_allclose(curve.mean_prediction, 0.2)

    def test_unread_feature_is_flat(self, uniform_rows):
        def model(Z):
            return Z[:, 0]

        curve = pdp(model, uniform_rows, "b", feature_names=["a", "b"])

        np.testing.assert_allclose(curve.mean_prediction, uniform_rows[:, 0].mean())
        assert curve.feature == "b"

    def test_unknown_feature(self, uniform_rows):
        with pytest.raises(ValueError):
            pdp(lambda Z: Z[:, 0], uniform_rows, "V12", feature_names=["a", "b"])

    def test_grid_is_strictly_increasing(self):
        grid = quantile_grid(np.array([1.0, 1.0, 1.0, 2.0]), 20)
        assert np.all(np.diff(grid) > 0)
        assert quantile_grid(np.full(5, 3.0), 20).tolist() == [3.0]

    def test_frame_columns(self, uniform_rows):
        frame = pdp(lambda Z: Z[:, 0], uniform_rows, 0, n_grid=5).to_frame()
        assert list(frame.columns) == ["grid_value", "mean_proba"]
        assert len(frame) == 5


class TestPermutationImportance:
    """Test cases for permutation feature importance."""

    def test_indicator_model(self):
        X = np.random.default_rng(5).normal(size=(400, 3))
        y = (X[:, 1] > np.median(X[:, 1])).astype(np.int64)

        def model(Z):
            return (Z[:, 1] > np.median(X[:, 1])).astype(float)

        result = permutation_importance(model, X, y, n_repeats=5, seed=0)

        assert result.baseline == 1.0
        assert result.mean_drop[1] == pytest.approx(0.5, abs=0.1)
        assert result.mean_drop[0] == 0.0 and result.mean_drop[2] == 0.0
        assert result.ranking()["feature"].tolist()[0] == "f1"

    def test_unused_tree_feature(self, stump_model):
        gen = np.random.default_rng(1)
        X = np.column_stack([gen.uniform(0, 10, 100), gen.normal(size=100)])
        y = (X[:, 0] > 5).astype(np.int64)
        result = permutation_importance(stump_model.predict_proba, X, y, metric="f1", n_repeats=3)

        assert result.std_drop[1] == 0.0
        assert result.mean_drop[1] == 0.0

    def test_parallel_matches_sequential(self, stump_model):
        gen = np.random.default_rng(2)
        X = np.column_stack([gen.uniform(0, 10, 80), gen.normal(size=80)])
        y = (X[:, 0] + gen.normal(0, 2, 80) > 5).astype(np.int64)

        sequential = permutation_importance(stump_model.predict_proba, X, y, seed=3)
        parallel = permutation_importance(stump_model.predict_proba, X, y, seed=3, max_workers=2)
        assert np.array_equal(sequential.mean_drop, parallel.mean_drop)

    def test_unknown_metric(self, stump_model):
        with pytest.raises(ValueError):
            permutation_importance(stump_model.predict_proba, np.zeros((4, 2)), np.array([0, 1, 0, 1]),
                                   metric="accuracy")

    def test_single_class(self, stump_model):
        with pytest.raises(ValueError):
            permutation_importance(stump_model.predict_proba, np.zeros((4, 2)), np.zeros(4))
