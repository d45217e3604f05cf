"""Random-forest regression and classification built on the CART trees.

Reproducibility contract: per-tree generators derive from
SeedSequence((seed, tree_index)), bootstrap and candidate draws happen in a
fixed order, and split ties break deterministically, so identical data and
seed give bit-identical forests on either kernel backend.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import (
    ArityMismatch,
    DegenerateTarget,
    EmptyData,
    InvalidRatio,
    TooFewRows,
)
from .cart import Tree, apply_tree, build_tree

__all__ = ["ForestParams", "RandomForest", "train_test_split", "fit",
           "evaluate_regression", "evaluate_classification", "impurity_importance"]

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ForestParams:
    """Ensemble settings; ``None`` fields resolve per task at fit time:
    n_trees 500/2000 (regression/classification), min_samples_leaf 5/1,
    features_per_split ceil(p/3)/ceil(sqrt(p))."""

    n_trees: int | None = None
    max_depth: int | None = None
    min_samples_leaf: int | None = None
    features_per_split: int | None = None
    bootstrap: bool = True
    seed: int = 0

    def resolve(self, task: str, n_features: int) -> dict:
        if task == "regression":
            n_trees = self.n_trees if self.n_trees is not None else 500
            min_leaf = self.min_samples_leaf if self.min_samples_leaf is not None else 5
            fps = (self.features_per_split if self.features_per_split is not None
                   else max(1, math.ceil(n_features / 3)))
        elif task == "classification":
            n_trees = self.n_trees if self.n_trees is not None else 2000
            min_leaf = self.min_samples_leaf if self.min_samples_leaf is not None else 1
            fps = (self.features_per_split if self.features_per_split is not None
                   else max(1, math.ceil(math.sqrt(n_features))))
        else:
            raise ValueError(f"unknown task {task!r}")
        if n_trees < 1:
            raise ValueError("n_trees must be at least 1")
        if not (1 <= fps <= n_features):
            raise ValueError("features_per_split outside [1, n_features]")
        if min_leaf < 1:
            raise ValueError("min_samples_leaf must be at least 1")
        return {
            "n_trees": int(n_trees),
            "max_depth": self.max_depth,
            "min_samples_leaf": int(min_leaf),
            "features_per_split": int(fps),
            "bootstrap": bool(self.bootstrap),
            "seed": int(self.seed),
        }


@dataclass
class RandomForest:
    task: str
    feature_names: list
    params: dict
    trees: list = field(repr=False)
    class_labels: np.ndarray | None = None   # ascending original labels
    oob_indices: list = field(default_factory=list, repr=False)
    importances_raw: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def _check_matrix(self, X):
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_features:
            raise ArityMismatch(
                f"model expects {self.n_features} features, got {X.shape[1]}"
            )
        return X

    def predict_batch(self, X) -> np.ndarray:
        """Regression: (n,) means. Classification: (n, K) probabilities."""
        X = self._check_matrix(X)
        if self.task == "regression":
            acc = np.zeros(X.shape[0])
            for tree in self.trees:
                acc += tree.value[apply_tree(tree, X)]
        else:
            acc = np.zeros((X.shape[0], self.class_labels.size))
            for tree in self.trees:
                acc += tree.value[apply_tree(tree, X)]
        return acc / self.n_trees

    def predict(self, x_row):
        """Single-row prediction; same arithmetic as the batch path."""
        out = self.predict_batch(np.asarray(x_row, dtype=np.float64)[None, :])
        return float(out[0]) if self.task == "regression" else out[0]

    def predict_class(self, X) -> np.ndarray:
        """Majority-vote labels (first/lowest class wins ties)."""
        proba = self.predict_batch(X)
        return self.class_labels[np.argmax(proba, axis=1)]

    def decision_values(self, X) -> np.ndarray:
        """Scalar model output per row: the regression value, or for
        classifiers the probability-weighted mean class label (the expected
        rating on an ordinal scale)."""
        out = self.predict_batch(X)
        if self.task == "regression":
            return out
        return out @ self.class_labels.astype(np.float64)

    # --- serialization ------------------------------------------------------

    def to_json(self) -> str:
        doc = {
            "format_version": MODEL_FORMAT_VERSION,
            "task": self.task,
            "feature_names": list(self.feature_names),
            "params": self.params,
            "class_labels": None if self.class_labels is None else self.class_labels.tolist(),
            "importances_raw": None if self.importances_raw is None
            else self.importances_raw.tolist(),
            "oob_indices": [idx.tolist() for idx in self.oob_indices],
            "trees": [
                {
                    "feature": t.feature.tolist(),
                    "threshold": t.threshold.tolist(),
                    "left": t.left.tolist(),
                    "right": t.right.tolist(),
                    "value": t.value.tolist(),
                    "n_samples": t.n_samples.tolist(),
                }
                for t in self.trees
            ],
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "RandomForest":
        doc = json.loads(text)
        if doc.get("format_version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format {doc.get('format_version')}")
        trees = [
            Tree(
                feature=np.asarray(t["feature"], dtype=np.int32),
                threshold=np.asarray(t["threshold"], dtype=np.float64),
                left=np.asarray(t["left"], dtype=np.int32),
                right=np.asarray(t["right"], dtype=np.int32),
                value=np.asarray(t["value"], dtype=np.float64),
                n_samples=np.asarray(t["n_samples"], dtype=np.int32),
            )
            for t in doc["trees"]
        ]
        labels = doc.get("class_labels")
        imp = doc.get("importances_raw")
        return cls(
            task=doc["task"],
            feature_names=list(doc["feature_names"]),
            params=doc["params"],
            trees=trees,
            class_labels=None if labels is None else np.asarray(labels),
            oob_indices=[np.asarray(i, dtype=np.int64) for i in doc.get("oob_indices", [])],
            importances_raw=None if imp is None else np.asarray(imp, dtype=np.float64),
        )


def train_test_split(rows, ratio: float, seed: int):
    """Deterministic shuffled split; train size round(ratio * n), clamped so
    both sides stay nonempty."""
    if not (0.0 < ratio < 1.0):
        raise InvalidRatio(f"ratio must lie strictly inside (0, 1), got {ratio}")
    n = len(rows)
    if n < 2:
        raise TooFewRows("need at least 2 rows to split")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    perm = rng.permutation(n)
    n_train = min(max(int(round(ratio * n)), 1), n - 1)
    train_idx, test_idx = perm[:n_train], perm[n_train:]
    if isinstance(rows, np.ndarray):
        return rows[train_idx], rows[test_idx]
    return [rows[i] for i in train_idx], [rows[i] for i in test_idx]


def fit(X, y, task: str, params: ForestParams = ForestParams(),
        feature_names=None) -> RandomForest:
    """Train an ensemble. ``y`` holds real targets (regression) or discrete
    labels (classification; any hashable ints)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise EmptyData("X must be a nonempty 2-d matrix")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains missing or non-finite values")
    n, p = X.shape
    if feature_names is None:
        feature_names = [f"x{j}" for j in range(p)]
    if len(feature_names) != p:
        raise ValueError("feature_names length mismatch")

    if task == "regression":
        y_arr = np.asarray(y, dtype=np.float64)
        if y_arr.shape != (n,):
            raise EmptyData("y length mismatch")
        if not np.all(np.isfinite(y_arr)):
            raise ValueError("y contains missing or non-finite values")
        if y_arr.max() == y_arr.min() and n > 1:
            # constant targets carry no variance to explain
            raise DegenerateTarget("regression target has zero variance")
        class_labels = None
        y_enc = y_arr
        n_classes = 0
    elif task == "classification":
        y_raw = np.asarray(y)
        if y_raw.shape != (n,):
            raise EmptyData("y length mismatch")
        class_labels = np.unique(y_raw)
        if class_labels.size < 2:
            raise DegenerateTarget("classification needs at least 2 classes")
        lookup = {v: k for k, v in enumerate(class_labels.tolist())}
        y_enc = np.asarray([lookup[v] for v in y_raw.tolist()], dtype=np.int64)
        n_classes = class_labels.size
    else:
        raise ValueError(f"unknown task {task!r}")

    resolved = params.resolve(task, p)
    trees = []
    oob = []
    importances = np.zeros(p)
    for k in range(resolved["n_trees"]):
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence((resolved["seed"], k)))
        )
        if resolved["bootstrap"]:
            sample = rng.integers(0, n, size=n)
            oob.append(np.setdiff1d(np.arange(n), sample))
        else:
            sample = np.arange(n)
            oob.append(np.empty(0, dtype=np.int64))
        trees.append(
            build_tree(
                X[sample], y_enc[sample], task, n_classes,
                min_samples_leaf=resolved["min_samples_leaf"],
                max_depth=resolved["max_depth"],
                features_per_split=resolved["features_per_split"],
                rng=rng,
                importance_out=importances,
            )
        )
    return RandomForest(
        task=task,
        feature_names=list(feature_names),
        params=resolved,
        trees=trees,
        class_labels=class_labels,
        oob_indices=oob,
        importances_raw=importances,
    )


def evaluate_regression(model: RandomForest, X_test, y_test) -> float:
    """Held-out R^2 = 1 - SSE/SST."""
    y_test = np.asarray(y_test, dtype=np.float64)
    if y_test.size == 0 or y_test.max() == y_test.min():
        raise DegenerateTarget("test target needs positive variance")
    pred = model.predict_batch(X_test)
    sse = float(np.sum((y_test - pred) ** 2))
    sst = float(np.sum((y_test - y_test.mean()) ** 2))
    return 1.0 - sse / sst


def evaluate_classification(model: RandomForest, X_test, y_test):
    """Accuracy and a confusion matrix over ascending class labels
    (rows true, columns predicted)."""
    y_test = np.asarray(y_test)
    if y_test.size == 0:
        raise EmptyData("empty test set")
    pred = model.predict_class(X_test)
    labels = np.unique(np.concatenate([model.class_labels, y_test]))
    lookup = {v: k for k, v in enumerate(labels.tolist())}
    matrix = np.zeros((labels.size, labels.size), dtype=np.int64)
    for t, q in zip(y_test.tolist(), pred.tolist()):
        matrix[lookup[t], lookup[q]] += 1
    accuracy = float(np.trace(matrix)) / float(matrix.sum())
    return accuracy, matrix, labels


def impurity_importance(model: RandomForest) -> np.ndarray:
    """Total impurity decrease per feature, normalized to sum to 1
    (all-zero when no tree ever split)."""
    raw = model.importances_raw
    if raw is None:
        raise ValueError("model carries no importance accumulator")
    total = raw.sum()
    if total <= 0:
        return np.zeros_like(raw)
    return raw / total
