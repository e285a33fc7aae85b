"""Confusion matrices and precision/recall/F1 reports for the classifier."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .classify import FBS_ORDER, ClassificationReport, FbsClass

__all__ = [
    "ClassScores",
    "EvalError",
    "MetricsReport",
    "compute_metrics",
    "confusion_matrix",
    "format_report",
    "load_gold",
    "round_half_up",
    "summarize_scores",
]


class EvalError(ValueError):
    pass


def round_half_up(value: float) -> int:
    return int(Decimal(repr(float(value))).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def load_gold(path: str | Path) -> dict[str, FbsClass]:
    """Read a gold-label file: ``{"labels": {name: class}}`` or a flat mapping."""
    try:
        doc = json.loads(Path(path).read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise EvalError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    labels = doc.get("labels", doc) if isinstance(doc, dict) else None
    if not isinstance(labels, dict):
        raise EvalError(f"{path}: expected a mapping of property name to class")
    gold: dict[str, FbsClass] = {}
    for name, cls in labels.items():
        if not str(name).strip():
            raise EvalError(f"{path}: empty property name")
        try:
            gold[str(name).strip()] = FbsClass.parse(str(cls))
        except ValueError as exc:
            raise EvalError(f"{path}: {name!r}: {exc}") from None
    return gold


def confusion_matrix(
    gold: Mapping[str, FbsClass],
    predicted: ClassificationReport | Mapping[str, FbsClass],
    labels: Sequence[FbsClass] = FBS_ORDER,
) -> np.ndarray:
    """Rows are gold classes, columns predicted classes, in ``labels`` order."""
    pred = predicted.labels() if isinstance(predicted, ClassificationReport) else dict(predicted)
    missing = sorted(name for name in pred if name not in gold)
    if missing:
        raise EvalError("no gold label for: " + ", ".join(repr(m) for m in missing))
    index = {cls: i for i, cls in enumerate(labels)}
    matrix = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for name, cls in pred.items():
        matrix[index[gold[name]], index[cls]] += 1
    return matrix


@dataclass(frozen=True)
class ClassScores:
    precision: float
    recall: float
    f1: float
    support: int
    undefined: bool = False  # precision or recall had a zero denominator


@dataclass
class MetricsReport:
    per_class: dict[FbsClass, ClassScores]
    accuracy: float | None
    macro_avg: tuple[float, float, float]
    weighted_avg: tuple[float, float, float]
    total_support: int
    flags: list[str] = field(default_factory=list)


def _f1(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def summarize_scores(per_class: Mapping[FbsClass, ClassScores], accuracy: float | None = None) -> MetricsReport:
    """Macro and support-weighted averages over classes with support > 0."""
    supported = [s for s in per_class.values() if s.support > 0]
    total = sum(s.support for s in per_class.values())
    if not supported:
        raise EvalError("no class has support; nothing to average")
    macro = tuple(float(np.mean([getattr(s, k) for s in supported])) for k in ("precision", "recall", "f1"))
    weights = np.array([s.support for s in supported], dtype=float)
    weighted = tuple(
        float(np.dot(weights, [getattr(s, k) for s in supported]) / weights.sum()) for k in ("precision", "recall", "f1")
    )
    flags = [f"{cls.value}: zero denominator, reported as 0" for cls, s in per_class.items() if s.undefined]
    return MetricsReport(dict(per_class), accuracy, macro, weighted, total, flags)


def compute_metrics(matrix: np.ndarray | Sequence[Sequence[int]], labels: Sequence[FbsClass] = FBS_ORDER) -> MetricsReport:
    """Per-class scores in percent, plus overall accuracy and the averages."""
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != len(labels):
        raise EvalError(f"matrix shape {m.shape} does not match {len(labels)} labels")
    if (m < 0).any():
        raise EvalError("confusion matrix has negative counts")
    total = int(m.sum())
    if total == 0:
        raise EvalError("confusion matrix is empty")
    diag = np.diag(m).astype(float)
    col = m.sum(axis=0).astype(float)
    row = m.sum(axis=1).astype(float)
    per_class = {}
    for i, cls in enumerate(labels):
        p = 100 * diag[i] / col[i] if col[i] else 0.0
        r = 100 * diag[i] / row[i] if row[i] else 0.0
        per_class[cls] = ClassScores(p, r, _f1(p, r), int(row[i]), undefined=not (col[i] and row[i]))
    return summarize_scores(per_class, accuracy=100 * float(diag.sum()) / total)


def format_report(report: MetricsReport) -> str:
    """Fixed-width table with integer percentages."""
    if report is None:
        raise EvalError("no report to format")
    head = f"{'':<18}{'Precision (%)':>15}{'Recall (%)':>12}{'F1 score (%)':>14}{'Support':>9}"
    lines = [head]
    for cls, s in report.per_class.items():
        lines.append(
            f"{cls.value:<18}{round_half_up(s.precision):>15}{round_half_up(s.recall):>12}"
            f"{round_half_up(s.f1):>14}{s.support:>9}"
        )
    if report.accuracy is not None:
        lines.append(f"{'Accuracy':<18}{round_half_up(report.accuracy):>15}{'':>12}{'':>14}{report.total_support:>9}")
    if len(report.per_class) > 1:
        for title, (p, r, f) in (("Macro average", report.macro_avg), ("Weighted average", report.weighted_avg)):
            lines.append(
                f"{title:<18}{round_half_up(p):>15}{round_half_up(r):>12}{round_half_up(f):>14}{report.total_support:>9}"
            )
    return "\n".join(lines) + "\n"
