import csv
import json

import numpy as np
import pytest

from xplainbench.explain import (
    Attribution,
    BackgroundSet,
    ExplainerConfig,
    ExplainError,
    attributions_to_csv,
    attributions_to_json,
    exact_shapley_values,
    explain_batch,
    explain_row,
    kernel_shap_values,
    sample_background,
    tree_shap_values,
    value_function,
)
from xplainbench.explain.exact import shapley_pair_weights
from xplainbench.explain.kernel import shapley_kernel_weight
from xplainbench.explain.outputs import resolve_output, resolve_target_class
from xplainbench.explain.treeshap import TreeDecomposition
from xplainbench.models import (
    GradientBoostingClassifier,
    MlpClassifier,
    OneVsRestClassifier,
    RandomForestClassifier,
)


def _linear_fn(w):
    return lambda X: X @ w


class TestValueFunction:
    def test_linear_hand_example(self):
        # v(S) = sum_{i in S} x_i + mean_b sum_{i not in S} b_i
        w = np.ones(3)
        x = np.array([1.0, 2.0, 3.0])
        bg = np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]])
        fn = _linear_fn(w)
        assert value_function(fn, x, [], bg) == pytest.approx(1.5)
        assert value_function(fn, x, [0], bg) == pytest.approx(1 + 1.0)
        assert value_function(fn, x, [0, 2], bg) == pytest.approx(4 + 0.5)
        assert value_function(fn, x, [0, 1, 2], bg) == pytest.approx(6.0)

    def test_grand_coalition_equals_model_output(self, rng):
        fn = lambda X: np.sin(X).sum(axis=1)
        x = rng.random(4)
        bg = rng.random((5, 4))
        assert value_function(fn, x, range(4), bg) == pytest.approx(fn(x[None])[0])


class TestWeights:
    def test_pair_weights_sum_to_one(self):
        for d in (1, 2, 5, 12):
            w = shapley_pair_weights(d)
            from math import comb
            total = sum(comb(d - 1, s) * w[s] for s in range(d))
            assert total == pytest.approx(1.0)

    def test_kernel_weight_symmetry(self):
        for d in (3, 6, 9):
            for s in range(1, d):
                assert shapley_kernel_weight(d, s) == pytest.approx(
                    shapley_kernel_weight(d, d - s)
                )


class TestAxioms:
    def test_efficiency(self, rng):
        fn = lambda X: (X[:, 0] * X[:, 1] + np.exp(X[:, 2]))
        x = rng.random(3)
        bg = rng.random((8, 3))
        phi0, phi, fx = exact_shapley_values(fn, x, bg)
        assert phi0 + phi.sum() == pytest.approx(fx, abs=1e-12)
        assert fx == pytest.approx(fn(x[None])[0])

    def test_dummy_feature_gets_zero(self, rng):
        fn = lambda X: X[:, 0] ** 2 + 3 * X[:, 2]  # ignores feature 1
        x = rng.random(3)
        bg = rng.random((6, 3))
        _, phi, _ = exact_shapley_values(fn, x, bg)
        assert phi[1] == pytest.approx(0.0, abs=1e-12)

    def test_symmetry(self, rng):
        fn = lambda X: X[:, 0] * X[:, 1] + X[:, 0] + X[:, 1] + X[:, 2]
        x = np.array([0.7, 0.7, 0.2])
        b = rng.random((5, 1))
        bg = np.column_stack([b[:, 0], b[:, 0], rng.random(5)])
        _, phi, _ = exact_shapley_values(fn, x, bg)
        assert phi[0] == pytest.approx(phi[1], abs=1e-12)

    def test_linearity(self, rng):
        f = lambda X: X[:, 0] * X[:, 1]
        g = lambda X: np.cos(X[:, 1] - X[:, 2])
        h = lambda X: 2.0 * f(X) - 3.0 * g(X)
        x = rng.random(3)
        bg = rng.random((6, 3))
        _, phi_f, _ = exact_shapley_values(f, x, bg)
        _, phi_g, _ = exact_shapley_values(g, x, bg)
        _, phi_h, _ = exact_shapley_values(h, x, bg)
        assert np.allclose(phi_h, 2.0 * phi_f - 3.0 * phi_g, atol=1e-12)

    def test_linear_model_closed_form(self, rng):
        # for f(x) = w . x, phi_i = w_i (x_i - mean(background_i))
        w = rng.normal(size=5)
        x = rng.random(5)
        bg = rng.random((10, 5))
        _, phi, _ = exact_shapley_values(_linear_fn(w), x, bg)
        assert np.allclose(phi, w * (x - bg.mean(axis=0)), atol=1e-12)


class TestKernel:
    def test_full_enumeration_matches_exact(self, rng):
        w = rng.normal(size=5)
        fn = lambda X: np.tanh(X @ w) + X[:, 0] * X[:, 3]
        x = rng.random(5)
        bg = rng.random((7, 5))
        p0e, phie, fxe = exact_shapley_values(fn, x, bg)
        p0k, phik, fxk = kernel_shap_values(fn, x, bg, budget="full")
        assert p0k == pytest.approx(p0e, abs=1e-10)
        assert fxk == pytest.approx(fxe, abs=1e-12)
        assert np.allclose(phik, phie, atol=1e-8)

    def test_sampled_budget_approximates_exact(self, rng):
        w = rng.normal(size=6)
        fn = _linear_fn(w)
        x = rng.random(6)
        bg = rng.random((5, 6))
        _, phie, _ = exact_shapley_values(fn, x, bg)
        p0, phi, fx = kernel_shap_values(fn, x, bg, budget=400, seed=3)
        assert p0 + phi.sum() == pytest.approx(fx, abs=1e-10)
        assert np.allclose(phi, phie, atol=0.05)

    def test_single_feature(self):
        fn = _linear_fn(np.array([2.0]))
        p0, phi, fx = kernel_shap_values(fn, np.array([3.0]),
                                         np.array([[1.0]]))
        assert (p0, fx) == (2.0, 6.0)
        assert phi == pytest.approx([4.0])

    def test_budget_too_small_rejected(self, rng):
        with pytest.raises(ExplainError, match="budget must be >= 6"):
            kernel_shap_values(_linear_fn(np.ones(4)), rng.random(4),
                               rng.random((3, 4)), budget=5)

    def test_sampled_deterministic_in_seed(self, rng):
        fn = lambda X: (X**2).sum(axis=1)
        x = rng.random(6)
        bg = rng.random((4, 6))
        a = kernel_shap_values(fn, x, bg, budget=64, seed=9)[1]
        b = kernel_shap_values(fn, x, bg, budget=64, seed=9)[1]
        assert np.array_equal(a, b)


class TestExactLimits:
    def test_refuses_wide_inputs(self):
        fn = _linear_fn(np.ones(21))
        with pytest.raises(ExplainError, match="kernel method"):
            exact_shapley_values(fn, np.zeros(21), np.zeros((2, 21)))


class TestTreeMethod:
    def _forest(self, alertness_split, n_trees=10):
        train, _ = alertness_split
        return RandomForestClassifier(
            n_trees=n_trees, max_depth=4, random_state=0
        ).fit(train.X, train.y)

    def test_matches_exact_on_forest(self, alertness_split):
        train, test = alertness_split
        model = self._forest(alertness_split)
        out = resolve_output(model, test.X[0], 1)
        bg = sample_background(train.X, size=16, seed=0).rows
        for i in range(5):
            p0e, phie, fxe = exact_shapley_values(out.fn, test.X[i], bg)
            p0t, phit, fxt = tree_shap_values(out.decomposition, test.X[i], bg)
            assert p0t == pytest.approx(p0e, abs=1e-10)
            assert fxt == pytest.approx(fxe, abs=1e-12)
            assert np.allclose(phit, phie, atol=1e-10)

    def test_matches_exact_on_boosting_margin(self, alertness_split):
        train, test = alertness_split
        model = GradientBoostingClassifier(n_rounds=10).fit(train.X, train.y)
        out = resolve_output(model, test.X[0], 1)
        bg = sample_background(train.X, size=12, seed=1).rows
        for i in range(5):
            p0e, phie, fxe = exact_shapley_values(out.fn, test.X[i], bg)
            p0t, phit, fxt = tree_shap_values(out.decomposition, test.X[i], bg)
            assert p0t == pytest.approx(p0e, abs=1e-10)
            assert np.allclose(phit, phie, atol=1e-10)

    def test_decomposition_evaluate_matches_model(self, alertness_split):
        train, test = alertness_split
        model = self._forest(alertness_split)
        out = resolve_output(model, test.X[0], 1)
        assert np.allclose(
            out.decomposition.evaluate(test.X[:20]),
            model.predict_proba(test.X[:20])[:, 1],
            atol=1e-12,
        )

    def test_empty_decomposition_rejected(self):
        with pytest.raises(ExplainError, match="empty"):
            TreeDecomposition([])


class TestTargetResolution:
    def test_integer_target_bounds(self, alertness_split):
        train, _ = alertness_split
        model = RandomForestClassifier(n_trees=2).fit(train.X, train.y)
        assert resolve_target_class(model, train.X[0], 1) == 1
        with pytest.raises(ExplainError, match="out of range"):
            resolve_target_class(model, train.X[0], 5)

    def test_positive_class_requires_binary(self, rng):
        X = rng.random((30, 3))
        y = rng.integers(0, 3, 30)
        y[:3] = [0, 1, 2]
        model = OneVsRestClassifier(
            RandomForestClassifier(n_trees=2)
        ).fit(X, y)
        with pytest.raises(ExplainError, match="binary"):
            resolve_target_class(model, X[0], "positive_class_prob")

    def test_predicted_class_follows_argmax(self, alertness_split):
        train, test = alertness_split
        model = RandomForestClassifier(n_trees=5).fit(train.X, train.y)
        for i in range(5):
            k = resolve_target_class(model, test.X[i], "predicted_class_prob")
            assert k == model.predict(test.X[i][None])[0]

    def test_unknown_target_rejected(self, alertness_split):
        train, _ = alertness_split
        model = RandomForestClassifier(n_trees=2).fit(train.X, train.y)
        with pytest.raises(ExplainError, match="unknown target"):
            resolve_target_class(model, train.X[0], "bogus")

    def test_ovr_component_score_is_explained(self, rng):
        # the explained scalar is the target component's raw positive
        # probability, not the normalized class probability
        X = rng.random((40, 3))
        y = rng.integers(0, 3, 40)
        y[:3] = [0, 1, 2]
        model = OneVsRestClassifier(
            RandomForestClassifier(n_trees=4, random_state=0)
        ).fit(X, y)
        out = resolve_output(model, X[0], 2)
        assert out.fn(X[:5]) == pytest.approx(model.class_scores(X[:5])[:, 2])


class TestBackground:
    def test_without_replacement(self, rng):
        X = np.arange(50, dtype=float)[:, None]
        bg = sample_background(X, size=20, seed=4)
        assert bg.size == 20
        assert len(np.unique(bg.rows)) == 20

    def test_oversized_request_returns_all_rows(self):
        X = np.arange(5, dtype=float)[:, None]
        bg = sample_background(X, size=100, seed=0)
        assert np.array_equal(bg.rows[:, 0], np.arange(5.0))

    def test_invalid_size(self):
        with pytest.raises(ExplainError):
            sample_background(np.zeros((3, 2)), size=0)


class TestExplainRowAndBatch:
    def test_tree_method_rejected_without_decomposition(self, alertness_split):
        train, _ = alertness_split
        model = MlpClassifier(epochs=1).fit(train.X, train.y)
        bg = sample_background(train.X, size=4, seed=0)
        cfg = ExplainerConfig(method="tree", target="positive_class_prob")
        with pytest.raises(ExplainError, match="use the kernel method"):
            explain_row(model, train.X[0], cfg, bg)

    def test_batch_prefixes_row_index_on_error(self, alertness_split):
        train, _ = alertness_split
        model = MlpClassifier(epochs=1).fit(train.X, train.y)
        bg = sample_background(train.X, size=4, seed=0)
        cfg = ExplainerConfig(method="tree", target="positive_class_prob")
        with pytest.raises(ExplainError, match="row 0:"):
            explain_batch(model, train.X[:3], cfg, bg)

    def test_unknown_method_rejected(self):
        with pytest.raises(ExplainError, match="unknown method"):
            ExplainerConfig(method="lime")

    def test_bad_budget_string_rejected(self):
        with pytest.raises(ExplainError, match="budget"):
            ExplainerConfig(budget="half")

    def test_batch_explains_each_row_for_its_own_class(self, alertness_split):
        train, test = alertness_split
        model = RandomForestClassifier(n_trees=10, max_depth=4,
                                       random_state=0).fit(train.X, train.y)
        bg = sample_background(train.X, size=8, seed=0)
        cfg = ExplainerConfig(method="tree", target="predicted_class_prob")
        rows = test.X[:6]
        atts = explain_batch(model, rows, cfg, bg,
                             feature_names=test.feature_names)
        preds = model.predict(rows)
        for a, x, k in zip(atts, rows, preds):
            assert a.target_class == k
            assert a.fx == pytest.approx(model.predict_proba(x[None])[0, k])
            assert a.efficiency_gap() < 1e-10
            assert a.feature_names == test.feature_names


class TestExport:
    def _attributions(self):
        return [
            Attribution(0.5, np.array([0.125, -0.25]), 0.375, ["a", "b"],
                        method="exact", scale="probability", target_class=1),
            Attribution(0.1, np.array([0.0, 0.2]), 0.3, ["a", "b"],
                        method="exact", scale="probability", target_class=0),
        ]

    def test_csv_round_trip(self, tmp_path):
        path = tmp_path / "att.csv"
        attributions_to_csv(self._attributions(), path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["fx", "phi0", "phi_a", "phi_b"]
        assert [float(v) for v in rows[1]] == [0.375, 0.5, 0.125, -0.25]

    def test_json_structure(self):
        doc = json.loads(attributions_to_json(self._attributions()))
        assert len(doc) == 2
        assert doc[0]["phi"] == [0.125, -0.25]
        assert doc[0]["target_class"] == 1
        assert doc[1]["method"] == "exact"

    def test_empty_export_rejected(self, tmp_path):
        with pytest.raises(ExplainError):
            attributions_to_csv([], tmp_path / "x.csv")
