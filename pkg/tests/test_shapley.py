import itertools
import math

import numpy as np
import pytest

from dermalab import errors
from dermalab import forest as fo
from dermalab.forest.cart import Tree


def grid_model(v1, v2, fn):
    """Exact interpolating model on the cartesian grid v1 x v2."""
    grid = np.asarray([(a, b) for a in v1 for b in v2])
    y = np.asarray([fn(a, b) for a, b in grid])
    model = fo.fit(grid, y, "regression",
                   fo.ForestParams(n_trees=1, bootstrap=False,
                                   min_samples_leaf=1, features_per_split=2))
    np.testing.assert_allclose(model.predict_batch(grid), y, atol=1e-12)
    return model, grid


def brute_force_shapley(model, x_row, background):
    """Independent enumeration over itertools combinations with fsum.

    Shares only the model's single-row predictions with the production path;
    subsets, weights, and marginals are derived from first principles.
    """
    p = len(x_row)
    idx = list(range(p))
    n_bg = background.shape[0]

    def value(subset):
        preds = []
        for row in background:
            composite = row.copy()
            for j in subset:
                composite[j] = x_row[j]
            preds.append(model.predict(composite))
        return math.fsum(preds) / n_bg

    phi = []
    for i in idx:
        others = [j for j in idx if j != i]
        terms = []
        for size in range(p):
            w = (math.factorial(size) * math.factorial(p - 1 - size)
                 / math.factorial(p))
            for subset in itertools.combinations(others, size):
                terms.append(w * (value(subset + (i,)) - value(subset)))
        phi.append(math.fsum(terms))
    base = value(())
    return np.asarray(phi), base


class TestExactShapley:
    def test_additive_model_closed_form(self):
        model, grid = grid_model([0.0, 1.0, 2.0, 3.0], [0.0, 10.0, 20.0],
                                 lambda a, b: a + b)
        background = grid[[0, 4, 7, 11]]
        x = grid[5]
        attr = fo.exact_shapley(model, x, background)
        assert attr.values[0] == pytest.approx(x[0] - background[:, 0].mean(),
                                               abs=1e-6)
        assert attr.values[1] == pytest.approx(x[1] - background[:, 1].mean(),
                                               abs=1e-6)
        assert attr.base_value == pytest.approx(
            np.mean([model.predict(b) for b in background]), abs=1e-12)

    def test_row_equal_to_single_background_row(self):
        model, grid = grid_model([0.0, 1.0, 2.0], [0.0, 5.0], lambda a, b: a * b + a)
        bg = grid[[3]]
        attr = fo.exact_shapley(model, grid[3], bg)
        np.testing.assert_array_equal(attr.values, np.zeros(2))

    def test_symmetry_for_duplicated_feature(self):
        # two trees with mirrored split features make f(x1, x2) symmetric
        vals = np.asarray([0.0, 1.0, 2.0, 3.0])
        y = 2.0 * vals
        base = fo.fit(vals[:, None], y, "regression",
                      fo.ForestParams(n_trees=1, bootstrap=False,
                                      min_samples_leaf=1, features_per_split=1))
        t1 = base.trees[0]
        swapped = Tree(
            feature=np.where(t1.feature >= 0, 1 - t1.feature, t1.feature).astype(np.int32),
            threshold=t1.threshold.copy(), left=t1.left.copy(),
            right=t1.right.copy(), value=t1.value.copy(),
            n_samples=t1.n_samples.copy(),
        )
        model = fo.RandomForest(
            task="regression", feature_names=["a", "b"],
            params=dict(base.params), trees=[
                Tree(feature=np.where(t1.feature >= 0, 0, -1).astype(np.int32),
                     threshold=t1.threshold.copy(), left=t1.left.copy(),
                     right=t1.right.copy(), value=t1.value.copy(),
                     n_samples=t1.n_samples.copy()),
                swapped,
            ],
        )
        background = np.asarray([[0.0, 0.0], [3.0, 3.0]])
        attr = fo.exact_shapley(model, np.asarray([2.0, 2.0]), background)
        assert attr.values[0] == pytest.approx(attr.values[1], abs=1e-9)

    def test_dummy_feature_gets_exact_zero(self):
        rng = np.random.default_rng(0)
        X = np.column_stack([rng.normal(size=60), np.full(60, 1.0)])
        y = 3.0 * X[:, 0]
        model = fo.fit(X, y, "regression",
                       fo.ForestParams(n_trees=20, seed=1, features_per_split=2,
                                       min_samples_leaf=1))
        attr = fo.exact_shapley(model, X[0], X[10:20])
        assert attr.values[1] == 0.0

    def test_efficiency_on_random_rows(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(200, 5))
        y = X[:, 0] * X[:, 1] + np.sin(X[:, 2])
        model = fo.fit(X, y, "regression", fo.ForestParams(n_trees=50, seed=3))
        background = X[:20]
        for k in range(20):
            attr = fo.exact_shapley(model, X[k], background)
            assert abs(attr.total() - model.predict(X[k])) <= 1e-6

    def test_matches_brute_force_bit_for_bit(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(80, 5))
        y = rng.normal(size=80) + 2.0 * X[:, 3]
        model = fo.fit(X, y, "regression", fo.ForestParams(n_trees=10, seed=5))
        background = X[:4]
        for k in (0, 17, 42):
            attr = fo.exact_shapley(model, X[k], background)
            phi_bf, base_bf = brute_force_shapley(model, X[k], background)
            assert attr.base_value == base_bf
            assert attr.values.tolist() == phi_bf.tolist()

    def test_too_many_features(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(40, 13))
        y = X[:, 0]
        model = fo.fit(X, y, "regression", fo.ForestParams(n_trees=5, seed=0))
        with pytest.raises(errors.TooManyFeatures):
            fo.exact_shapley(model, X[0], X[:5])

    def test_empty_background(self):
        X, y = np.random.default_rng(7).normal(size=(30, 3)), np.arange(30.0)
        model = fo.fit(X, y, "regression", fo.ForestParams(n_trees=5, seed=0))
        with pytest.raises(errors.EmptyBackground):
            fo.exact_shapley(model, X[0], np.zeros((0, 3)))


class TestSummaryPoints:
    def test_one_row_gives_p_points(self):
        rng = np.random.default_rng(8)
        X = rng.normal(size=(50, 4))
        y = X[:, 0] + X[:, 1]
        model = fo.fit(X, y, "regression", fo.ForestParams(n_trees=10, seed=1))
        points = fo.shap_summary_points(model, X[:1], X[:10])
        assert len(points) == 4
        assert {p["feature"] for p in points} == set(model.feature_names)

    def test_monotone_model_orders_attributions(self):
        from dermalab.stats import spearman_rho

        rng = np.random.default_rng(9)
        x1 = rng.normal(size=300)
        X = np.column_stack([x1, np.full(300, 2.0)])
        y = 5.0 * x1
        model = fo.fit(X, y, "regression",
                       fo.ForestParams(n_trees=50, seed=2, features_per_split=2,
                                       min_samples_leaf=1))
        rows = X[:40]
        points = fo.shap_summary_points(model, rows, X[:60])
        pts = [p for p in points if p["feature"] == "x0"]
        rho = spearman_rho([p["value"] for p in pts], [p["phi"] for p in pts])
        assert rho == pytest.approx(1.0)

    def test_constant_model_all_zero(self):
        # min_samples_leaf = n forbids any split, leaving stump-only trees
        X = np.random.default_rng(10).normal(size=(30, 3))
        y = np.random.default_rng(11).normal(size=30)
        model = fo.fit(X, y, "regression",
                       fo.ForestParams(n_trees=5, seed=0, min_samples_leaf=30,
                                       bootstrap=False))
        points = fo.shap_summary_points(model, X[:5], X[:10])
        assert all(p["phi"] == 0.0 for p in points)

    def test_percentiles_span_zero_to_hundred(self):
        rng = np.random.default_rng(11)
        X = rng.normal(size=(20, 3))
        y = X[:, 0]
        model = fo.fit(X, y, "regression", fo.ForestParams(n_trees=5, seed=0))
        points = fo.shap_summary_points(model, X, X[:5])
        pct = [p["percentile"] for p in points]
        assert min(pct) >= 0.0 and max(pct) <= 100.0
