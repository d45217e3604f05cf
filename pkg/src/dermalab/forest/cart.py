"""Single CART tree growth and traversal over contiguous numpy arrays.

Split rule: candidate features are a per-node random draw, thresholds are
midpoints between consecutive distinct sorted values, the score is summed
child SSE (regression) or count-weighted child Gini (classification), and
ties resolve to the lowest feature index then the lowest threshold. Nodes
are laid out depth-first (left subtree before right), which together with
the per-node candidate draws makes the build fully reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._native import best_split_classification, best_split_regression, tree_apply

__all__ = ["Tree", "build_tree", "apply_tree"]

_LEAF = -1


@dataclass
class Tree:
    feature: np.ndarray    # int32; _LEAF marks a leaf
    threshold: np.ndarray  # float64
    left: np.ndarray       # int32 child ids
    right: np.ndarray
    value: np.ndarray      # (m,) leaf means or (m, K) class proportions
    n_samples: np.ndarray  # int32 training rows per node

    @property
    def n_nodes(self) -> int:
        return self.feature.size


def _node_score_regression(y):
    s = float(np.sum(y))
    s2 = float(np.sum(y * y))
    return s2 - s * s / y.size


def _node_score_classification(codes, n_classes):
    counts = np.bincount(codes, minlength=n_classes).astype(np.float64)
    n = float(codes.size)
    return n - float(counts @ counts) / n


def build_tree(X, y, task, n_classes, *, min_samples_leaf, max_depth,
               features_per_split, rng, importance_out):
    """Grow one tree on (X, y); y holds class codes for classification.

    ``importance_out`` accumulates per-feature impurity decreases in place.
    """
    n, p = X.shape
    feature, threshold, left, right = [], [], [], []
    values, n_samples = [], []

    def new_node():
        feature.append(_LEAF)
        threshold.append(0.0)
        left.append(_LEAF)
        right.append(_LEAF)
        values.append(None)
        n_samples.append(0)
        return len(feature) - 1

    def make_leaf(node, idx):
        if task == "regression":
            values[node] = float(np.mean(y[idx]))
        else:
            counts = np.bincount(y[idx], minlength=n_classes).astype(np.float64)
            values[node] = counts / counts.sum()

    root = new_node()
    stack = [(root, np.arange(n), 0)]
    while stack:
        node, idx, depth = stack.pop()
        n_samples[node] = idx.size
        y_node = y[idx]
        pure = (y_node.max() == y_node.min())
        if pure or idx.size < 2 * min_samples_leaf or (
            max_depth is not None and depth >= max_depth
        ):
            make_leaf(node, idx)
            continue

        candidates = np.sort(rng.choice(p, size=features_per_split, replace=False))
        best_score = np.inf
        best_feat = -1
        best_thr = 0.0
        for f in candidates:
            col = X[idx, f]
            order = np.argsort(col, kind="stable")
            v = np.ascontiguousarray(col[order])
            if task == "regression":
                ys = np.ascontiguousarray(y_node[order], dtype=np.float64)
                thr, score, valid = best_split_regression(v, ys, min_samples_leaf)
            else:
                ys = np.ascontiguousarray(y_node[order], dtype=np.int64)
                thr, score, valid = best_split_classification(
                    v, ys, n_classes, min_samples_leaf
                )
            if valid and score < best_score:
                best_score = score
                best_feat = int(f)
                best_thr = thr

        if best_feat < 0:
            make_leaf(node, idx)
            continue

        if task == "regression":
            parent_score = _node_score_regression(y_node.astype(np.float64))
        else:
            parent_score = _node_score_classification(y_node, n_classes)
        importance_out[best_feat] += parent_score - best_score

        mask = X[idx, best_feat] <= best_thr
        li = new_node()
        ri = new_node()
        feature[node] = best_feat
        threshold[node] = best_thr
        left[node] = li
        right[node] = ri
        # right pushed first so the left subtree is laid out next
        stack.append((ri, idx[~mask], depth + 1))
        stack.append((li, idx[mask], depth + 1))

    if task == "regression":
        value = np.asarray([v if v is not None else 0.0 for v in values], dtype=np.float64)
    else:
        value = np.zeros((len(values), n_classes))
        for k, v in enumerate(values):
            if v is not None:
                value[k] = v
    return Tree(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        value=value,
        n_samples=np.asarray(n_samples, dtype=np.int32),
    )


def apply_tree(tree: Tree, X) -> np.ndarray:
    """Leaf node id for every row of X."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    return tree_apply(tree.feature, tree.threshold, tree.left, tree.right, X)
