"""Per-class precision/recall/F1, ROC curves and trapezoidal AUC.

The report's "Average" row is the support-weighted mean of the
per-class values.  ROC thresholds are the distinct scores in descending
order plus a sentinel above the maximum, with prediction = (score >=
threshold), so the curve always starts at (0,0) and ends at (1,1).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class ConfusionCounts:
    """Binary confusion counts with one class treated as positive."""

    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int

    def to_dict(self) -> dict:
        return {
            "precision": float(self.precision),
            "recall": float(self.recall),
            "f1": float(self.f1),
            "support": int(self.support),
        }


@dataclass
class EvaluationReport:
    per_class: dict[int, ClassMetrics]
    average: ClassMetrics
    auc: float | None = None

    def to_dict(self) -> dict:
        return {
            "classes": {str(c): m.to_dict() for c, m in sorted(self.per_class.items())},
            "average": self.average.to_dict(),
            "auc": None if self.auc is None else float(self.auc),
        }

    def format_table(self) -> str:
        """Fixed-width text table with two-decimal metrics."""
        lines = [f"{'class':<10}{'precision':>10}{'recall':>8}{'f1-score':>10}{'support':>9}"]
        for cls in sorted(self.per_class):
            m = self.per_class[cls]
            lines.append(
                f"{cls:<10}{m.precision:>10.2f}{m.recall:>8.2f}"
                f"{m.f1:>10.2f}{m.support:>9d}"
            )
        a = self.average
        lines.append(
            f"{'Average':<10}{a.precision:>10.2f}{a.recall:>8.2f}"
            f"{a.f1:>10.2f}{a.support:>9d}"
        )
        if self.auc is not None:
            lines.append(f"AUC: {self.auc:.2f}")
        return "\n".join(lines)


@dataclass
class RocCurve:
    """Ordered (fpr, tpr) points, one per threshold."""

    points: list[tuple[float, float]]
    thresholds: list[float]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["threshold", "fpr", "tpr"])
        for thr, (fpr, tpr) in zip(self.thresholds, self.points):
            writer.writerow([repr(float(thr)), repr(float(fpr)), repr(float(tpr))])
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")


def confusion_counts(
    predictions: np.ndarray, labels: np.ndarray, positive: int
) -> ConfusionCounts:
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    pred_pos = predictions == positive
    true_pos = labels == positive
    return ConfusionCounts(
        tp=int(np.sum(pred_pos & true_pos)),
        fp=int(np.sum(pred_pos & ~true_pos)),
        tn=int(np.sum(~pred_pos & ~true_pos)),
        fn=int(np.sum(~pred_pos & true_pos)),
    )


def _safe_div(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def classification_report(
    predictions: np.ndarray, labels: np.ndarray
) -> EvaluationReport:
    """Per-class precision/recall/F1 plus the support-weighted average row.

    Ratios with a zero denominator are reported as 0.
    """
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.shape != labels.shape:
        raise ValidationError(
            f"predictions shape {predictions.shape} != labels shape {labels.shape}"
        )
    if predictions.shape[0] == 0:
        raise ValidationError("cannot evaluate zero rows")

    per_class: dict[int, ClassMetrics] = {}
    for cls in (0, 1):
        c = confusion_counts(predictions, labels, positive=cls)
        precision = _safe_div(c.tp, c.tp + c.fp)
        recall = _safe_div(c.tp, c.tp + c.fn)
        f1 = _safe_div(2.0 * precision * recall, precision + recall)
        per_class[cls] = ClassMetrics(
            precision=precision, recall=recall, f1=f1, support=c.tp + c.fn
        )

    total = labels.shape[0]
    weights = {cls: per_class[cls].support / total for cls in per_class}
    average = ClassMetrics(
        precision=sum(weights[c] * per_class[c].precision for c in per_class),
        recall=sum(weights[c] * per_class[c].recall for c in per_class),
        f1=sum(weights[c] * per_class[c].f1 for c in per_class),
        support=total,
    )
    return EvaluationReport(per_class=per_class, average=average)


def roc_curve(scores: np.ndarray, labels: np.ndarray) -> RocCurve:
    """ROC points swept over the distinct scores in descending order."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise ValidationError(
            f"scores shape {scores.shape} != labels shape {labels.shape}"
        )
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("ROC needs at least one positive and one negative label")

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_pos = (labels[order] == 1).astype(np.int64)
    cum_tp = np.cumsum(sorted_pos)
    cum_fp = np.cumsum(1 - sorted_pos)

    # last index of each run of equal scores marks one threshold
    n = scores.shape[0]
    boundary = np.nonzero(np.diff(sorted_scores))[0]
    last_of_run = np.append(boundary, n - 1)

    points = [(0.0, 0.0)]
    thresholds = [float("inf")]
    for i in last_of_run:
        points.append((cum_fp[i] / n_neg, cum_tp[i] / n_pos))
        thresholds.append(float(sorted_scores[i]))
    return RocCurve(points=points, thresholds=thresholds)


def auc_trapezoid(curve: RocCurve) -> float:
    """Area under the curve by the trapezoidal rule."""
    area = 0.0
    for (x0, y0), (x1, y1) in zip(curve.points, curve.points[1:]):
        area += (x1 - x0) * (y1 + y0) / 2.0
    return area


_SVG_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]


def render_roc_svg(entries: list[tuple[str, RocCurve, float]]) -> str:
    """Standalone SVG line plot of one or more ROC curves.

    ``entries`` is a list of (model name, curve, auc).  Output bytes are
    deterministic for identical inputs.
    """
    width, height = 640, 480
    left, right, top, bottom = 70, 20, 20, 55
    plot_w = width - left - right
    plot_h = height - top - bottom

    def sx(x: float) -> float:
        return left + x * plot_w

    def sy(y: float) -> float:
        return top + (1.0 - y) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="black" stroke-width="1"/>',
    ]
    for tick in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0):
        x, y = sx(tick), sy(tick)
        parts.append(
            f'<line x1="{x:.1f}" y1="{top + plot_h}" x2="{x:.1f}" '
            f'y2="{top + plot_h + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{x:.1f}" y="{top + plot_h + 20}" font-size="12" '
            f'text-anchor="middle">{tick:.1f}</text>'
        )
        parts.append(
            f'<line x1="{left - 5}" y1="{y:.1f}" x2="{left}" y2="{y:.1f}" '
            'stroke="black"/>'
        )
        parts.append(
            f'<text x="{left - 8}" y="{y + 4:.1f}" font-size="12" '
            f'text-anchor="end">{tick:.1f}</text>'
        )
    parts.append(
        f'<text x="{left + plot_w / 2:.1f}" y="{height - 12}" font-size="14" '
        'text-anchor="middle">False positive rate</text>'
    )
    parts.append(
        f'<text x="18" y="{top + plot_h / 2:.1f}" font-size="14" '
        f'text-anchor="middle" transform="rotate(-90 18 {top + plot_h / 2:.1f})">'
        'True positive rate</text>'
    )
    parts.append(
        f'<line x1="{sx(0):.1f}" y1="{sy(0):.1f}" x2="{sx(1):.1f}" y2="{sy(1):.1f}" '
        'stroke="gray" stroke-dasharray="6,4" stroke-width="1"/>'
    )
    for idx, (name, curve, auc) in enumerate(entries):
        color = _SVG_PALETTE[idx % len(_SVG_PALETTE)]
        coords = " ".join(
            f"{sx(fpr):.2f},{sy(tpr):.2f}" for fpr, tpr in curve.points
        )
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            'stroke-width="2"/>'
        )
        ly = top + plot_h - 20 - 18 * (len(entries) - 1 - idx)
        lx = left + plot_w - 200
        parts.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 24}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{lx + 30}" y="{ly}" font-size="12">'
            f"{name} (AUC = {auc:.2f})</text>"
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
