# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the hot kernels.

Arithmetic mirrors ``_pykernels`` exactly (same operation order, same
expressions) so both backends produce bit-identical trees and filter output.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()

INF = float("inf")


def best_split_regression(double[::1] values, double[::1] y, Py_ssize_t min_leaf):
    cdef Py_ssize_t n = values.shape[0]
    if n < 2 * min_leaf:
        return 0.0, INF, False
    cdef double[::1] cs = np.empty(n)
    cdef double[::1] cs2 = np.empty(n)
    cdef double acc = 0.0, acc2 = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        acc = acc + y[i]
        acc2 = acc2 + y[i] * y[i]
        cs[i] = acc
        cs2[i] = acc2
    cdef double total = cs[n - 1]
    cdef double total2 = cs2[n - 1]
    cdef double best = INF
    cdef Py_ssize_t best_pos = -1
    cdef double nl, nr, sl, sl2, sr, score
    for i in range(min_leaf - 1, n - min_leaf):
        if values[i] < values[i + 1]:
            nl = <double>(i + 1)
            nr = <double>(n - i - 1)
            sl = cs[i]
            sl2 = cs2[i]
            sr = total - sl
            score = (sl2 - sl * sl / nl) + ((total2 - sl2) - sr * sr / nr)
            if score < best:
                best = score
                best_pos = i
    if best_pos < 0:
        return 0.0, INF, False
    return 0.5 * (values[best_pos] + values[best_pos + 1]), best, True


def best_split_classification(double[::1] values, cnp.int64_t[::1] codes,
                              Py_ssize_t n_classes, Py_ssize_t min_leaf):
    cdef Py_ssize_t n = values.shape[0]
    if n < 2 * min_leaf:
        return 0.0, INF, False
    # running left-side class counts; totals taken in one preliminary pass
    cdef double[::1] left = np.zeros(n_classes)
    cdef double[::1] total = np.zeros(n_classes)
    cdef Py_ssize_t i, c
    for i in range(n):
        total[codes[i]] += 1.0
    cdef double best = INF
    cdef Py_ssize_t best_pos = -1
    cdef double nl, nr, suml, sumr, cl, cr, score
    for i in range(n - min_leaf):
        left[codes[i]] += 1.0
        if i < min_leaf - 1:
            continue
        if values[i] < values[i + 1]:
            nl = <double>(i + 1)
            nr = <double>(n - i - 1)
            suml = 0.0
            sumr = 0.0
            for c in range(n_classes):
                cl = left[c]
                cr = total[c] - cl
                suml = suml + cl * cl
                sumr = sumr + cr * cr
            score = (nl - suml / nl) + (nr - sumr / nr)
            if score < best:
                best = score
                best_pos = i
    if best_pos < 0:
        return 0.0, INF, False
    return 0.5 * (values[best_pos] + values[best_pos + 1]), best, True


def tree_apply(int[::1] feature, double[::1] threshold,
               int[::1] left, int[::1] right, double[:, ::1] X):
    cdef Py_ssize_t n = X.shape[0]
    cdef cnp.ndarray[cnp.int32_t, ndim=1] out = np.zeros(n, dtype=np.int32)
    cdef int[::1] node = out
    cdef Py_ssize_t r
    cdef int nd
    for r in range(n):
        nd = 0
        while feature[nd] >= 0:
            if X[r, feature[nd]] <= threshold[nd]:
                nd = left[nd]
            else:
                nd = right[nd]
        node[r] = nd
    return out


def iir2_forward(double a1, double a2, double[::1] x):
    """Direct-form-II-transposed update, matching scipy.signal.lfilter."""
    cdef Py_ssize_t n = x.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    cdef double[::1] y = out
    cdef double z0 = 0.0, z1 = 0.0, yi
    cdef Py_ssize_t i
    for i in range(n):
        yi = x[i] + z0
        z0 = z1 - a1 * yi
        z1 = -a2 * yi
        y[i] = yi
    return out


def iir2_backward(double a1, double a2, double[::1] x):
    cdef Py_ssize_t n = x.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    cdef double[::1] y = out
    cdef double z0 = 0.0, z1 = 0.0, yi
    cdef Py_ssize_t i
    for i in range(n - 1, -1, -1):
        yi = x[i] + z0
        z0 = z1 - a1 * yi
        z1 = -a2 * yi
        y[i] = yi
    return out
