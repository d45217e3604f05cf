"""Exact interventional Shapley attributions by full subset enumeration.

For every coalition S the value v(S) averages the model's scalar output over
the background rows with the features in S pinned to the explained row.
Feature i's attribution sums weighted marginals w(|S|) * (v(S+i) - v(S))
over all S not containing i, with w(s) = s! (p-1-s)! / p!.

All averaging and accumulation uses math.fsum, which is exact up to one
final rounding and therefore independent of enumeration order: any
independently coded enumeration over the same model reproduces these values
bit for bit. Efficiency (base + sum(phi) == prediction) is asserted on every
call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyBackground, TooManyFeatures
from .ensemble import RandomForest

__all__ = ["ShapleyAttribution", "exact_shapley", "shap_summary_points"]

MAX_ENUMERATED_FEATURES = 12
_EFFICIENCY_TOL = 1e-6


@dataclass(frozen=True)
class ShapleyAttribution:
    feature_names: tuple
    values: np.ndarray      # phi per feature, units of the model output
    base_value: float       # expected output over the background set

    def total(self) -> float:
        return self.base_value + math.fsum(self.values.tolist())


def _coalition_values(model: RandomForest, x_row, background) -> np.ndarray:
    """v over all 2^p bitmask coalitions (bit j set = feature j from x_row)."""
    p = model.n_features
    n_bg = background.shape[0]
    n_masks = 1 << p
    big = np.tile(background, (n_masks, 1))
    for j in range(p):
        masks_with_j = np.nonzero(np.arange(n_masks) & (1 << j))[0]
        rows = (masks_with_j[:, None] * n_bg + np.arange(n_bg)[None, :]).ravel()
        big[rows, j] = x_row[j]
    preds = model.decision_values(big)
    return np.asarray(
        [math.fsum(preds[m * n_bg:(m + 1) * n_bg].tolist()) / n_bg
         for m in range(n_masks)]
    )


def exact_shapley(model: RandomForest, x_row, background) -> ShapleyAttribution:
    """Attribute a single prediction across features.

    ``background`` is the reference row set (2-d). Limited to 12 features by
    the 2^p enumeration.
    """
    p = model.n_features
    if p > MAX_ENUMERATED_FEATURES:
        raise TooManyFeatures(
            f"{p} features exceeds the {MAX_ENUMERATED_FEATURES}-feature enumeration limit"
        )
    x_row = np.asarray(x_row, dtype=np.float64).ravel()
    if x_row.size != p:
        raise ValueError("x_row arity mismatch")
    background = np.ascontiguousarray(background, dtype=np.float64)
    if background.ndim == 1:
        background = background[None, :]
    if background.size == 0:
        raise EmptyBackground("background set is empty")
    if background.shape[1] != p:
        raise ValueError("background arity mismatch")

    v = _coalition_values(model, x_row, background)
    fact = [math.factorial(k) for k in range(p + 1)]
    weights = [fact[s] * fact[p - 1 - s] / fact[p] for s in range(p)]

    full = (1 << p) - 1
    phi = np.empty(p)
    for j in range(p):
        bit = 1 << j
        terms = [
            weights[int(m).bit_count()] * (v[m | bit] - v[m])
            for m in range(1 << p)
            if not m & bit
        ]
        phi[j] = math.fsum(terms)

    base = float(v[0])
    prediction = float(v[full])
    defect = abs(base + math.fsum(phi.tolist()) - prediction)
    if defect > _EFFICIENCY_TOL:
        raise AssertionError(f"efficiency defect {defect:.3e} exceeds {_EFFICIENCY_TOL}")
    return ShapleyAttribution(
        feature_names=tuple(model.feature_names), values=phi, base_value=base
    )


def _midranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size)
    sorted_vals = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def shap_summary_points(model: RandomForest, rows, background):
    """Beeswarm feed: one point per (row, feature) with the attribution, the
    raw feature value, and its percentile within the row set."""
    rows = np.ascontiguousarray(rows, dtype=np.float64)
    if rows.ndim == 1:
        rows = rows[None, :]
    n = rows.shape[0]
    percentiles = np.empty_like(rows)
    for j in range(rows.shape[1]):
        if n == 1:
            percentiles[:, j] = 50.0
        else:
            percentiles[:, j] = 100.0 * (_midranks(rows[:, j]) - 0.5) / n
    points = []
    for i in range(n):
        attr = exact_shapley(model, rows[i], background)
        for j, name in enumerate(model.feature_names):
            points.append(
                {
                    "row": i,
                    "feature": name,
                    "phi": float(attr.values[j]),
                    "value": float(rows[i, j]),
                    "percentile": float(percentiles[i, j]),
                }
            )
    return points
