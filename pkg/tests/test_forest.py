import json

import numpy as np
import pytest

from dermalab import errors
from dermalab import forest as fo


def toy_regression(n=500, p=4, seed=0, slope=3.0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p))
    y = slope * X[:, 0]
    return X, y


class TestTrainTestSplit:
    def test_seven_three(self):
        rows = list(range(10))
        train, test = fo.train_test_split(rows, 0.7, 0)
        assert len(train) == 7 and len(test) == 3
        assert sorted(train + test) == rows

    def test_deterministic(self):
        rows = np.arange(100)
        a = fo.train_test_split(rows, 0.7, 42)
        b = fo.train_test_split(rows, 0.7, 42)
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])

    def test_ratio_one_rejected(self):
        with pytest.raises(errors.InvalidRatio):
            fo.train_test_split(list(range(10)), 1.0, 0)

    def test_too_few_rows(self):
        with pytest.raises(errors.TooFewRows):
            fo.train_test_split([1], 0.5, 0)

    def test_both_sides_nonempty_at_extremes(self):
        train, test = fo.train_test_split(list(range(10)), 0.96, 3)
        assert len(train) == 9 and len(test) == 1


class TestFitRegression:
    def test_strong_signal_held_out_r2(self):
        X, y = toy_regression()
        Xtr, Xte = fo.train_test_split(X, 0.7, 1)
        ytr, yte = fo.train_test_split(y, 0.7, 1)
        model = fo.fit(Xtr, ytr, "regression", fo.ForestParams(seed=2))
        assert fo.evaluate_regression(model, Xte, yte) >= 0.9

    def test_destroyed_signal_r2_low(self):
        X, y = toy_regression(seed=5)
        rng = np.random.default_rng(99)
        y_shuffled = y[rng.permutation(y.size)]
        Xtr, Xte = fo.train_test_split(X, 0.7, 1)
        ytr, yte = fo.train_test_split(y_shuffled, 0.7, 1)
        model = fo.fit(Xtr, ytr, "regression", fo.ForestParams(seed=2, n_trees=200))
        assert fo.evaluate_regression(model, Xte, yte) <= 0.1

    def test_constant_target_rejected(self):
        X = np.random.default_rng(0).normal(size=(20, 3))
        with pytest.raises(errors.DegenerateTarget):
            fo.fit(X, np.full(20, 2.0), "regression")

    def test_training_rows_interpolated_without_bootstrap(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(40, 3))
        y = rng.normal(size=40)
        model = fo.fit(X, y, "regression",
                       fo.ForestParams(n_trees=3, bootstrap=False,
                                       min_samples_leaf=1, features_per_split=3))
        np.testing.assert_allclose(model.predict_batch(X), y, atol=1e-12)

    def test_constant_prediction_for_constantish_leaf(self):
        X = np.asarray([[0.0], [1.0], [2.0], [3.0]])
        y = np.asarray([5.0, 5.0, 7.0, 7.0])
        model = fo.fit(X, y, "regression",
                       fo.ForestParams(n_trees=1, bootstrap=False,
                                       min_samples_leaf=1, features_per_split=1))
        assert model.predict([0.5]) == pytest.approx(5.0)
        assert model.predict([2.5]) == pytest.approx(7.0)

    def test_arity_mismatch(self):
        X, y = toy_regression(n=50)
        model = fo.fit(X, y, "regression", fo.ForestParams(n_trees=5))
        with pytest.raises(errors.ArityMismatch):
            model.predict(np.zeros(7))

    def test_empty_rejected(self):
        with pytest.raises(errors.EmptyData):
            fo.fit(np.zeros((0, 3)), np.zeros(0), "regression")


class TestDeterminism:
    def test_bit_identical_models(self):
        X, y = toy_regression(n=200)
        a = fo.fit(X, y, "regression", fo.ForestParams(seed=7, n_trees=50))
        b = fo.fit(X, y, "regression", fo.ForestParams(seed=7, n_trees=50))
        assert a.to_json() == b.to_json()

    def test_seed_changes_model(self):
        X, y = toy_regression(n=200)
        a = fo.fit(X, y, "regression", fo.ForestParams(seed=7, n_trees=20))
        b = fo.fit(X, y, "regression", fo.ForestParams(seed=8, n_trees=20))
        assert a.to_json() != b.to_json()

    def test_json_round_trip_preserves_predictions(self):
        X, y = toy_regression(n=150)
        model = fo.fit(X, y, "regression", fo.ForestParams(seed=3, n_trees=30))
        back = fo.RandomForest.from_json(model.to_json())
        np.testing.assert_array_equal(back.predict_batch(X), model.predict_batch(X))

    def test_scaling_targets_scales_predictions(self):
        # a power-of-two scale commutes exactly with IEEE rounding, so split
        # comparisons and hence tree shapes are provably unchanged
        X, y = toy_regression(n=200)
        a = fo.fit(X, y, "regression", fo.ForestParams(seed=1, n_trees=40))
        b = fo.fit(X, 8.0 * y, "regression", fo.ForestParams(seed=1, n_trees=40))
        np.testing.assert_array_equal(b.predict_batch(X), 8.0 * a.predict_batch(X))
        ia = fo.impurity_importance(a)
        ib = fo.impurity_importance(b)
        np.testing.assert_array_equal(np.argsort(ia), np.argsort(ib))


class TestClassification:
    def _labels(self, n=300, seed=0):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(n, 3))
        y = np.where(X[:, 0] > 0, 7, 2)  # Likert-ish labels
        return X, y

    def test_learns_threshold_rule(self):
        X, y = self._labels()
        Xtr, Xte = fo.train_test_split(X, 0.7, 4)
        ytr, yte = fo.train_test_split(y, 0.7, 4)
        model = fo.fit(Xtr, ytr, "classification", fo.ForestParams(seed=5, n_trees=100))
        accuracy, matrix, labels = fo.evaluate_classification(model, Xte, yte)
        assert accuracy >= 0.95
        assert labels.tolist() == [2, 7]

    def test_single_class_rejected(self):
        X = np.random.default_rng(0).normal(size=(30, 3))
        with pytest.raises(errors.DegenerateTarget):
            fo.fit(X, np.full(30, 5, dtype=int), "classification")

    def test_probability_vectors_normalized(self):
        X, y = self._labels(n=120)
        model = fo.fit(X, y, "classification", fo.ForestParams(seed=5, n_trees=60))
        proba = model.predict_batch(X)
        assert proba.min() >= 0.0
        np.testing.assert_allclose(proba.sum(axis=1), 1.0, atol=1e-9)

    def test_confusion_layout_and_accuracy(self):
        X = np.asarray([[0.0], [1.0], [2.0], [3.0]])
        y_true = np.asarray([1, 1, 5, 5])
        model = fo.fit(X, y_true, "classification",
                       fo.ForestParams(n_trees=1, bootstrap=False,
                                       min_samples_leaf=1, features_per_split=1))
        # force half the predictions wrong by evaluating shifted labels
        accuracy, matrix, labels = fo.evaluate_classification(
            model, X, np.asarray([1, 5, 1, 5]))
        assert accuracy == pytest.approx(0.5)
        assert matrix.tolist() == [[1, 1], [1, 1]]

    def test_perfect_predictions_identity_matrix(self):
        X, y = self._labels(n=200, seed=2)
        model = fo.fit(X, y, "classification", fo.ForestParams(seed=5, n_trees=100))
        accuracy, matrix, labels = fo.evaluate_classification(model, X, y)
        assert accuracy == pytest.approx(1.0)
        off_diag = matrix.sum() - np.trace(matrix)
        assert off_diag == 0

    def test_decision_values_are_expected_labels(self):
        X, y = self._labels(n=150, seed=3)
        model = fo.fit(X, y, "classification", fo.ForestParams(seed=5, n_trees=60))
        dv = model.decision_values(X)
        proba = model.predict_batch(X)
        np.testing.assert_allclose(dv, proba @ np.asarray([2.0, 7.0]))


class TestImportance:
    def test_sums_to_one(self):
        X, y = toy_regression(n=300)
        model = fo.fit(X, y, "regression", fo.ForestParams(seed=6, n_trees=50))
        imp = fo.impurity_importance(model)
        assert imp.sum() == pytest.approx(1.0, abs=1e-9)

    def test_informative_feature_dominates(self):
        X, y = toy_regression(n=400, seed=8)
        model = fo.fit(X, y, "regression", fo.ForestParams(seed=6, n_trees=100))
        imp = fo.impurity_importance(model)
        assert imp[0] >= 0.8

    def test_defaults_match_task(self):
        p = fo.ForestParams()
        reg = p.resolve("regression", 9)
        cls = p.resolve("classification", 9)
        assert reg["n_trees"] == 500 and cls["n_trees"] == 2000
        assert reg["min_samples_leaf"] == 5 and cls["min_samples_leaf"] == 1
        assert reg["features_per_split"] == 3 and cls["features_per_split"] == 3


class TestOob:
    def test_oob_indices_disjoint_from_bootstrap(self):
        X, y = toy_regression(n=60)
        model = fo.fit(X, y, "regression", fo.ForestParams(seed=9, n_trees=10))
        assert len(model.oob_indices) == 10
        for oob in model.oob_indices:
            assert 0 < oob.size < 60  # bootstrap leaves some rows out
