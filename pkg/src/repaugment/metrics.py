"""ICBHI-style evaluation: specificity, sensitivity, score, per-class accuracy.

Specificity is the recall of the normal class; sensitivity is exact-class
recall pooled over the three abnormal classes; the headline score is their
arithmetic mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .nn import ClassifierParams, forward
from .store import DataError, LABEL_NAMES, NUM_CLASSES


class MetricError(DataError):
    """Evaluation impossible (empty input or an undefined denominator)."""


@dataclass(frozen=True)
class EvalReport:
    """confusion rows = true class, columns = predicted class.

    per_class_acc entries are None for classes absent from the test set.
    """

    confusion: np.ndarray
    sp: float
    se: float
    score: float
    per_class_acc: tuple

    def to_dict(self) -> dict:
        return {"confusion": self.confusion.tolist(),
                "sp": self.sp, "se": self.se, "score": self.score,
                "per_class_acc": list(self.per_class_acc)}

    @classmethod
    def from_dict(cls, data: dict) -> "EvalReport":
        return cls(np.asarray(data["confusion"], dtype=np.int64),
                   data["sp"], data["se"], data["score"],
                   tuple(data["per_class_acc"]))


def score_of(sp: float, se: float) -> float:
    """Arithmetic mean of specificity and sensitivity."""
    if not (0.0 <= sp <= 1.0 and 0.0 <= se <= 1.0):
        raise ValueError(f"sp and se must lie in [0, 1], got {sp}, {se}")
    return (sp + se) / 2


def confusion_matrix(true_labels: np.ndarray,
                     pred_labels: np.ndarray) -> np.ndarray:
    counts = np.zeros((NUM_CLASSES, NUM_CLASSES), dtype=np.int64)
    np.add.at(counts, (true_labels, pred_labels), 1)
    return counts


def report_from_confusion(confusion: np.ndarray) -> EvalReport:
    confusion = np.asarray(confusion, dtype=np.int64)
    row_totals = confusion.sum(axis=1)
    n_normal = int(row_totals[0])
    n_abnormal = int(row_totals[1:].sum())
    if n_normal == 0:
        raise MetricError("specificity undefined: no normal examples")
    if n_abnormal == 0:
        raise MetricError("sensitivity undefined: no abnormal examples")
    diag = np.diag(confusion)
    sp = diag[0] / n_normal
    se = diag[1:].sum() / n_abnormal
    per_class = tuple(
        (int(diag[c]) / int(row_totals[c])) if row_totals[c] else None
        for c in range(NUM_CLASSES))
    return EvalReport(confusion=confusion, sp=float(sp), se=float(se),
                      score=score_of(float(sp), float(se)),
                      per_class_acc=per_class)


def evaluate(params: ClassifierParams, features: np.ndarray,
             labels: np.ndarray) -> EvalReport:
    """Argmax predictions (ties go to the lowest class code) + metrics."""
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if len(labels) == 0:
        raise MetricError("empty test set")
    logits = forward(params, features)
    preds = np.argmax(logits, axis=1)  # first max = lowest class code
    return report_from_confusion(confusion_matrix(labels, preds))


def _pct(value, spread=None) -> str:
    if value is None:
        return "-"
    if spread is None:
        return f"{100 * value:.2f}"
    return f"{100 * value:.2f}±{100 * spread:.2f}"


def format_report(report: EvalReport) -> str:
    """Single-run table: Sp/Se/Score plus per-class accuracy."""
    lines = [
        f"{'Sp (%)':>10} {'Se (%)':>10} {'Score (%)':>10}",
        f"{_pct(report.sp):>10} {_pct(report.se):>10} {_pct(report.score):>10}",
        "",
        "per-class accuracy (%):",
    ]
    for name, acc in zip(LABEL_NAMES, report.per_class_acc):
        lines.append(f"  {name:<8} {_pct(acc):>8}")
    return "\n".join(lines)


def aggregate_reports(reports) -> dict:
    """Mean / variance / std of each metric across seeds.

    Emits the score two ways: the mean of per-seed scores and the score
    recomputed from the mean sp and mean se (they differ only by rounding
    of the averaging order).
    """
    if not reports:
        raise MetricError("no reports to aggregate")

    def stats(values):
        values = [v for v in values]
        if any(v is None for v in values):
            return {"mean": None, "var": None, "std": None}
        mean = math.fsum(values) / len(values)
        var = math.fsum((v - mean) ** 2 for v in values) / len(values)
        return {"mean": mean, "var": var, "std": math.sqrt(var)}

    out = {
        "sp": stats([r.sp for r in reports]),
        "se": stats([r.se for r in reports]),
        "score": stats([r.score for r in reports]),
        "per_class_acc": [stats([r.per_class_acc[c] for r in reports])
                          for c in range(NUM_CLASSES)],
    }
    out["score_of_mean_sp_se"] = score_of(out["sp"]["mean"], out["se"]["mean"])
    return out


def format_aggregate(agg: dict) -> str:
    lines = [
        f"{'Sp (%)':>14} {'Se (%)':>14} {'Score (%)':>14}",
        "{:>14} {:>14} {:>14}".format(
            _pct(agg["sp"]["mean"], agg["sp"]["std"]),
            _pct(agg["se"]["mean"], agg["se"]["std"]),
            _pct(agg["score"]["mean"], agg["score"]["std"])),
        "",
        "per-class accuracy (%):",
    ]
    for name, st in zip(LABEL_NAMES, agg["per_class_acc"]):
        lines.append(f"  {name:<8} {_pct(st['mean'], st['std']):>14}")
    return "\n".join(lines)
