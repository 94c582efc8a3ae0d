"""MCAV scoring, thresholding and detection rates."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

from .model import McavEntry, McavReport, PresentationRecord


class Label(str, Enum):
    ANOMALOUS = "anomalous"
    NORMAL = "normal"


def compute_mcav(log: Iterable[PresentationRecord], include_flush: bool = True) -> McavReport:
    """Fraction of each antigen type's appearances that were presented mature.

    Counts are per appearance: a record carrying three copies of a type adds
    three to that type's total.
    """
    mature: Counter[str] = Counter()
    total: Counter[str] = Counter()
    seen_any = False
    for rec in log:
        seen_any = True
        if rec.flush and not include_flush:
            continue
        counts = Counter(rec.antigen)
        total.update(counts)
        if rec.is_mature:
            mature.update(counts)
    if not seen_any:
        raise ValueError("cannot compute MCAV of an empty presentation log")
    return McavReport({t: McavEntry(mature[t], total[t]) for t in sorted(total)})


@dataclass(frozen=True)
class Rates:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def tpr(self) -> float:
        pos = self.tp + self.fn
        return self.tp / pos if pos else math.nan

    @property
    def fpr(self) -> float:
        neg = self.fp + self.tn
        return self.fp / neg if neg else math.nan


@dataclass(frozen=True)
class ClassificationResult:
    mcav: Mapping[str, float]
    labels: Mapping[str, Label]
    threshold: float
    rates: Rates | None = None


def classify(report: McavReport | Mapping[str, float], threshold: float,
             truth: Mapping[str, bool] | None = None) -> ClassificationResult:
    """Label a type anomalous when its MCAV strictly exceeds ``threshold``."""
    if not (0.0 <= threshold <= 1.0):
        raise ValueError(f"threshold must lie in [0, 1], got {threshold!r}")
    scores = report.as_dict() if isinstance(report, McavReport) else dict(report)
    labels = {t: Label.ANOMALOUS if v > threshold else Label.NORMAL
              for t, v in scores.items()}
    result = ClassificationResult(scores, labels, threshold)
    if truth is not None:
        result = ClassificationResult(scores, labels, threshold, metrics(result, truth))
    return result


def metrics(result: ClassificationResult, truth: Mapping[str, bool]) -> Rates:
    missing = [t for t in result.labels if t not in truth]
    if missing:
        raise KeyError(f"no ground-truth label for antigen type(s): {', '.join(missing)}")
    tp = fp = tn = fn = 0
    for t, label in result.labels.items():
        predicted = label is Label.ANOMALOUS
        if truth[t]:
            tp += predicted
            fn += not predicted
        else:
            fp += predicted
            tn += not predicted
    return Rates(tp, fp, tn, fn)
