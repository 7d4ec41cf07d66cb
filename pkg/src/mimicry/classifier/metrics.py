"""Binary classification metrics for mimicry prediction.

Positive class = "the mutant mimics the vulnerability". Any metric whose
denominator is zero evaluates to 0.0 and is listed in the report's
``degenerate`` field rather than raising.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from ..errors import LengthMismatch


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @classmethod
    def from_labels(cls, preds: Sequence[bool], truths: Sequence[bool]) -> "ConfusionMatrix":
        if len(preds) != len(truths):
            raise LengthMismatch(
                f"got {len(preds)} predictions but {len(truths)} true labels"
            )
        tp = fp = fn = tn = 0
        for p, t in zip(preds, truths):
            if p and t:
                tp += 1
            elif p and not t:
                fp += 1
            elif not p and t:
                fn += 1
            else:
                tn += 1
        return cls(tp=tp, fp=fp, fn=fn, tn=tn)

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(
            tp=self.tp + other.tp,
            fp=self.fp + other.fp,
            fn=self.fn + other.fn,
            tn=self.tn + other.tn,
        )

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def to_json(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}

    @classmethod
    def from_json(cls, obj: dict) -> "ConfusionMatrix":
        return cls(tp=obj["tp"], fp=obj["fp"], fn=obj["fn"], tn=obj["tn"])


def precision(cm: ConfusionMatrix) -> float:
    denom = cm.tp + cm.fp
    return cm.tp / denom if denom else 0.0


def recall(cm: ConfusionMatrix) -> float:
    denom = cm.tp + cm.fn
    return cm.tp / denom if denom else 0.0


def mcc(cm: ConfusionMatrix) -> float:
    # Integer products stay exact; only the final division rounds.
    num = cm.tp * cm.tn - cm.fp * cm.fn
    denom_sq = (cm.tp + cm.fp) * (cm.tp + cm.fn) * (cm.tn + cm.fp) * (cm.tn + cm.fn)
    if denom_sq == 0:
        return 0.0
    return num / math.sqrt(denom_sq)


@dataclass(frozen=True)
class MetricsReport:
    matrix: ConfusionMatrix
    precision: float
    recall: float
    mcc: float
    degenerate: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "matrix": self.matrix.to_json(),
            "precision": self.precision,
            "recall": self.recall,
            "mcc": self.mcc,
            "degenerate": list(self.degenerate),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MetricsReport":
        return cls(
            matrix=ConfusionMatrix.from_json(obj["matrix"]),
            precision=float(obj["precision"]),
            recall=float(obj["recall"]),
            mcc=float(obj["mcc"]),
            degenerate=tuple(obj["degenerate"]),
        )


def report_from_matrix(cm: ConfusionMatrix) -> MetricsReport:
    degenerate = []
    if cm.tp + cm.fp == 0:
        degenerate.append("precision")
    if cm.tp + cm.fn == 0:
        degenerate.append("recall")
    if (cm.tp + cm.fp) * (cm.tp + cm.fn) * (cm.tn + cm.fp) * (cm.tn + cm.fn) == 0:
        degenerate.append("mcc")
    return MetricsReport(
        matrix=cm,
        precision=precision(cm),
        recall=recall(cm),
        mcc=mcc(cm),
        degenerate=tuple(degenerate),
    )


def evaluate(preds: Sequence[bool], truths: Sequence[bool]) -> MetricsReport:
    if not preds:
        raise LengthMismatch("cannot evaluate zero samples")
    return report_from_matrix(ConfusionMatrix.from_labels(preds, truths))


def headline(report: MetricsReport) -> str:
    """One-line summary, e.g. 'MCC 0.63, Precision 0.80, Recall 0.51'."""
    return (
        f"MCC {report.mcc:.2f}, Precision {report.precision:.2f},"
        f" Recall {report.recall:.2f}"
    )
