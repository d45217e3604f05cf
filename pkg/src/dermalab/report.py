"""Vector-graphics report artifacts: attribution beeswarm, per-event feature
box plots, and a confusion-matrix heatmap, plus a markdown page embedding
them. SVGs are emitted without dates and with a fixed hash salt so repeated
runs produce identical bytes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .features import FEATURE_NAMES  # noqa: E402

plt.rcParams["svg.hashsalt"] = "dermalab"
plt.rcParams["svg.fonttype"] = "none"

_SVG_META = {"Date": None}

__all__ = ["beeswarm_svg", "event_boxplot_svg", "confusion_svg", "write_report_md"]


def _save(fig, path):
    fig.savefig(path, format="svg", metadata=_SVG_META, bbox_inches="tight")
    plt.close(fig)


def feature_order_by_impact(points):
    """Feature names sorted by mean |phi| descending (beeswarm row order)."""
    by_feature = {}
    for pt in points:
        by_feature.setdefault(pt["feature"], []).append(abs(pt["phi"]))
    return sorted(by_feature, key=lambda f: (-sum(by_feature[f]) / len(by_feature[f]), f))


def beeswarm_svg(points, path) -> list:
    """Attribution summary: one row per feature (most impactful on top),
    points spread by attribution rank and colored by feature-value
    percentile. Returns the plotted feature order."""
    order = feature_order_by_impact(points)
    fig, ax = plt.subplots(figsize=(7.5, 0.6 * len(order) + 1.5))
    cmap = plt.get_cmap("coolwarm")
    for row, feat in enumerate(order):
        pts = [p for p in points if p["feature"] == feat]
        pts.sort(key=lambda p: p["phi"])
        n = len(pts)
        for k, p in enumerate(pts):
            jitter = 0.0 if n == 1 else (k / (n - 1) - 0.5) * 0.6
            ax.scatter(p["phi"], len(order) - 1 - row + jitter,
                       c=[cmap(p["percentile"] / 100.0)], s=14, linewidths=0)
    ax.axvline(0.0, color="0.6", lw=0.8)
    ax.set_yticks(range(len(order)))
    ax.set_yticklabels(list(reversed(order)))
    ax.set_xlabel("attribution (model output units)")
    sm = plt.cm.ScalarMappable(cmap=cmap, norm=plt.Normalize(0, 100))
    cbar = fig.colorbar(sm, ax=ax)
    cbar.set_label("feature value percentile")
    _save(fig, path)
    return order


def event_boxplot_svg(rows, feature, path) -> None:
    """Box plot of one feature grouped by event label (first-seen order)."""
    labels = []
    for r in rows:
        if r.label not in labels:
            labels.append(r.label)
    data = [[getattr(r, feature) for r in rows if r.label == lab] for lab in labels]
    fig, ax = plt.subplots(figsize=(1.2 * len(labels) + 2.5, 3.5))
    ax.boxplot(data, tick_labels=labels)
    ax.set_ylabel(feature)
    ax.tick_params(axis="x", rotation=30)
    _save(fig, path)


def confusion_svg(matrix, class_labels, path) -> None:
    fig, ax = plt.subplots(figsize=(4.5, 4))
    im = ax.imshow(matrix, cmap="Blues")
    ax.set_xticks(range(len(class_labels)))
    ax.set_xticklabels(class_labels)
    ax.set_yticks(range(len(class_labels)))
    ax.set_yticklabels(class_labels)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    vmax = max(int(max(max(row) for row in matrix)), 1)
    for i, row in enumerate(matrix):
        for j, v in enumerate(row):
            ax.text(j, i, str(v), ha="center", va="center",
                    color="white" if v > 0.6 * vmax else "black", fontsize=8)
    fig.colorbar(im, ax=ax)
    _save(fig, path)


def write_report_md(path, *, beeswarm_order=None, metrics=None, box_files=(),
                    confusion_file=None, stats_lines=()) -> None:
    lines = ["# Session report", ""]
    if metrics is not None:
        lines.append("## Model")
        lines.append("")
        if metrics.get("r2") is not None:
            lines.append(f"- task: {metrics['task']}, target: {metrics['target']}")
            lines.append(f"- held-out R^2: {metrics['r2']:.4f}")
        if metrics.get("accuracy") is not None:
            lines.append(f"- task: {metrics['task']}, target: {metrics['target']}")
            lines.append(f"- held-out accuracy: {metrics['accuracy']:.4f}")
        lines.append("")
    if beeswarm_order:
        lines.append("## Attribution summary")
        lines.append("")
        lines.append("Features by mean absolute attribution, most impactful first:")
        lines.append("")
        for k, f in enumerate(beeswarm_order, start=1):
            lines.append(f"{k}. {f}")
        lines.append("")
        lines.append("![attribution beeswarm](beeswarm.svg)")
        lines.append("")
    if confusion_file is not None:
        lines.append("## Confusion matrix")
        lines.append("")
        lines.append(f"![confusion matrix]({Path(confusion_file).name})")
        lines.append("")
    if box_files:
        lines.append("## Features by event")
        lines.append("")
        for p in box_files:
            lines.append(f"![{Path(p).stem}]({Path(p).name})")
        lines.append("")
    if stats_lines:
        lines.append("## Statistics")
        lines.append("")
        lines.extend(stats_lines)
        lines.append("")
    Path(path).write_text("\n".join(lines), encoding="utf-8")
