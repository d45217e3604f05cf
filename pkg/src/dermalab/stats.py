"""Nonparametric statistics over per-window features: tie-corrected
Kruskal-Wallis tests with chi-square p-values, Spearman rank correlations,
and per-event mean/std summaries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc

from .errors import (
    DegenerateInput,
    EmptyGroup,
    LengthMismatch,
    NegativeStatistic,
    TooFewGroups,
)
from .features import FEATURE_NAMES

__all__ = [
    "KruskalResult",
    "EventStats",
    "midranks",
    "kruskal_wallis",
    "spearman_rho",
    "chi2_upper_tail",
    "event_summary",
]


def midranks(values) -> np.ndarray:
    """1-based ranks with ties sharing their average rank."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size)
    sv = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def chi2_upper_tail(x: float, df: int) -> float:
    """P(X >= x) for a chi-square variable, via the regularized upper
    incomplete gamma function Q(df/2, x/2)."""
    if x < 0:
        raise NegativeStatistic(f"statistic must be nonnegative, got {x}")
    if not isinstance(df, (int, np.integer)) or df < 1:
        raise ValueError("df must be a positive integer")
    return float(gammaincc(df / 2.0, x / 2.0))


@dataclass(frozen=True)
class KruskalResult:
    H: float    # tie-corrected statistic
    df: int
    p: float

    def __post_init__(self):
        if self.H < 0 or not (0.0 <= self.p <= 1.0):
            raise ValueError("invalid test result")


def kruskal_wallis(groups) -> KruskalResult:
    """Rank test of k independent samples.

    Pooled midranks, H = (12 / (N (N+1))) * sum n_j (rbar_j - rbar)^2 divided
    by the tie correction 1 - sum(t^3 - t) / (N^3 - N); p from the chi-square
    upper tail at k-1 degrees of freedom. All-identical data gives H = 0.
    """
    groups = [np.asarray(g, dtype=np.float64) for g in groups]
    if len(groups) < 2:
        raise TooFewGroups("need at least 2 groups")
    for k, g in enumerate(groups):
        if g.size == 0:
            raise EmptyGroup(f"group {k} is empty")
    pooled = np.concatenate(groups)
    n_total = pooled.size
    if n_total < 3:
        raise TooFewGroups("need at least 3 observations in total")
    ranks = midranks(pooled)
    grand = 0.5 * (n_total + 1)
    h = 0.0
    start = 0
    for g in groups:
        r = ranks[start:start + g.size]
        h += g.size * (r.mean() - grand) ** 2
        start += g.size
    h *= 12.0 / (n_total * (n_total + 1))
    _, counts = np.unique(pooled, return_counts=True)
    ties = float(np.sum(counts.astype(np.float64) ** 3 - counts))
    correction = 1.0 - ties / (n_total ** 3 - n_total)
    if correction <= 0.0:
        h = 0.0  # every observation identical
    else:
        h /= correction
    h = float(h)
    df = len(groups) - 1
    return KruskalResult(H=h, df=df, p=chi2_upper_tail(h, df))


def spearman_rho(x, y) -> float:
    """Rank correlation as the Pearson correlation of midranks."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size != y.size:
        raise LengthMismatch(f"lengths differ: {x.size} vs {y.size}")
    if x.size < 3:
        raise DegenerateInput("need at least 3 pairs")
    if np.unique(x).size < 2 or np.unique(y).size < 2:
        raise DegenerateInput("inputs need at least 2 distinct values each")
    rx = midranks(x)
    ry = midranks(y)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    return float((dx @ dy) / np.sqrt((dx @ dx) * (dy @ dy)))


@dataclass(frozen=True)
class EventStats:
    """Per (event label, feature): sample mean, sample std (n-1), and n.
    Entries with n = 1 report std 0 and are listed in ``singletons``."""

    labels: tuple
    features: tuple
    table: dict                 # (label, feature) -> (mean, std, n)
    singletons: tuple = ()      # (label, feature) pairs with n = 1

    def rows(self):
        for label in self.labels:
            for feat in self.features:
                mean, std, n = self.table[(label, feat)]
                yield label, feat, mean, std, n

    def format_cell(self, label, feature) -> str:
        mean, std, _ = self.table[(label, feature)]
        return f"{mean:.4f} ± {std:.4f}"


def event_summary(rows, features=FEATURE_NAMES) -> EventStats:
    """Mean +/- sample std of each feature grouped by event label, in first-
    seen label order."""
    labels = []
    grouped = {}
    for r in rows:
        if r.label not in grouped:
            grouped[r.label] = []
            labels.append(r.label)
        grouped[r.label].append(r)
    table = {}
    singletons = []
    for label in labels:
        for feat in features:
            vals = np.asarray([getattr(r, feat) for r in grouped[label]], dtype=np.float64)
            mean = float(vals.mean())
            if vals.size > 1:
                std = float(vals.std(ddof=1))
            else:
                std = 0.0
                singletons.append((label, feat))
            table[(label, feat)] = (mean, std, int(vals.size))
    return EventStats(
        labels=tuple(labels), features=tuple(features), table=table,
        singletons=tuple(singletons),
    )
