"""numpy/scipy fallback for the compiled kernels.

The arithmetic here must stay expression-for-expression identical to
``_kernels.pyx`` so that trees and filter states come out bit-identical on
either backend: cumulative sums are sequential on both sides, score formulas
share the same operation order, and the IIR recurrences mirror lfilter's
direct-form-II-transposed update.
"""

import numpy as np
from scipy.signal import lfilter

_NO_SPLIT = (0.0, np.inf, False)


def best_split_regression(values, y, min_leaf):
    """Best SSE split of a node already sorted by feature value.

    Returns ``(threshold, score, valid)`` where score is the summed child SSE
    and the first position attaining the minimum wins (lowest threshold).
    """
    n = values.shape[0]
    if n < 2 * min_leaf:
        return _NO_SPLIT
    cs = np.cumsum(y)
    cs2 = np.cumsum(y * y)
    total = cs[n - 1]
    total2 = cs2[n - 1]
    pos = np.arange(min_leaf - 1, n - min_leaf)
    ok = values[pos] < values[pos + 1]
    if not ok.any():
        return _NO_SPLIT
    pos = pos[ok]
    nl = (pos + 1).astype(np.float64)
    nr = (n - pos - 1).astype(np.float64)
    sl = cs[pos]
    sl2 = cs2[pos]
    sr = total - sl
    score = (sl2 - sl * sl / nl) + ((total2 - sl2) - sr * sr / nr)
    k = int(np.argmin(score))
    thr = 0.5 * (values[pos[k]] + values[pos[k] + 1])
    return float(thr), float(score[k]), True


def best_split_classification(values, codes, n_classes, min_leaf):
    """Best Gini split (score = nl*gini_l + nr*gini_r) of a sorted node."""
    n = values.shape[0]
    if n < 2 * min_leaf:
        return _NO_SPLIT
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), codes] = 1.0
    cum = np.cumsum(onehot, axis=0)
    total = cum[n - 1]
    pos = np.arange(min_leaf - 1, n - min_leaf)
    ok = values[pos] < values[pos + 1]
    if not ok.any():
        return _NO_SPLIT
    pos = pos[ok]
    nl = (pos + 1).astype(np.float64)
    nr = (n - pos - 1).astype(np.float64)
    cl = cum[pos]
    cr = total - cl
    # counts are exact integers in float64, so the class-sum order is moot
    score = (nl - (cl * cl).sum(axis=1) / nl) + (nr - (cr * cr).sum(axis=1) / nr)
    k = int(np.argmin(score))
    thr = 0.5 * (values[pos[k]] + values[pos[k] + 1])
    return float(thr), float(score[k]), True


def tree_apply(feature, threshold, left, right, X):
    """Route every row of X to its leaf; returns int32 leaf node ids."""
    n = X.shape[0]
    node = np.zeros(n, dtype=np.int32)
    active = feature[node] >= 0
    while active.any():
        idx = np.nonzero(active)[0]
        nd = node[idx]
        f = feature[nd]
        go_left = X[idx, f] <= threshold[nd]
        node[idx] = np.where(go_left, left[nd], right[nd]).astype(np.int32)
        active[idx] = feature[node[idx]] >= 0
    return node


def iir2_forward(a1, a2, x):
    """y[i] = x[i] - a1*y[i-1] - a2*y[i-2], zero initial conditions."""
    return lfilter([1.0], [1.0, a1, a2], x)


def iir2_backward(a1, a2, x):
    """Same recurrence run from the last sample backwards (adjoint use)."""
    return lfilter([1.0], [1.0, a1, a2], x[::-1])[::-1]
