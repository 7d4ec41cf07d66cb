"""Project-grouped k-fold cross-validation.

Mutants from one project never straddle a fold boundary: unique group
names are shuffled once with the given seed and dealt round-robin to
folds, then every sample follows its group. Both the pooled report
(union of per-fold predictions) and per-fold averages are emitted.
"""
from __future__ import annotations

from dataclasses import dataclass
from statistics import fmean
from typing import Sequence

import numpy as np

from ..errors import TooFewGroups
from .forest import ForestConfig, LabeledSample, train_forest
from .metrics import ConfusionMatrix, MetricsReport, report_from_matrix


def fold_assignment(groups: Sequence[str], n_folds: int, seed: int) -> dict[str, int]:
    uniq = sorted(set(groups))
    if len(uniq) < n_folds:
        raise TooFewGroups(f"{len(uniq)} groups cannot fill {n_folds} folds")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(uniq))
    return {uniq[int(g)]: i % n_folds for i, g in enumerate(order)}


def grouped_folds(
    groups: Sequence[str], n_folds: int = 5, seed: int = 0
) -> list[list[int]]:
    """Sample indices per fold; each group's samples land in exactly one fold."""
    assign = fold_assignment(groups, n_folds, seed)
    folds: list[list[int]] = [[] for _ in range(n_folds)]
    for i, g in enumerate(groups):
        folds[assign[g]].append(i)
    return folds


@dataclass(frozen=True)
class FoldReport:
    fold_index: int
    test_groups: tuple[str, ...]
    n_test: int
    report: MetricsReport

    def to_json(self) -> dict:
        return {
            "fold_index": self.fold_index,
            "test_groups": list(self.test_groups),
            "n_test": self.n_test,
            "report": self.report.to_json(),
        }


@dataclass(frozen=True)
class CrossValReport:
    folds: tuple[FoldReport, ...]
    pooled: MetricsReport
    averaged: dict[str, float]
    predictions: tuple[tuple[str, float, bool, bool], ...]

    def to_json(self) -> dict:
        return {
            "folds": [f.to_json() for f in self.folds],
            "pooled": self.pooled.to_json(),
            "averaged": dict(self.averaged),
        }


def cross_validate(
    data: Sequence[LabeledSample],
    k: int = 5,
    seed: int = 0,
    forest: ForestConfig | None = None,
) -> CrossValReport:
    groups = [s.group_id for s in data]
    folds = grouped_folds(groups, n_folds=k, seed=seed)
    fold_reports: list[FoldReport] = []
    pooled_cm = ConfusionMatrix(0, 0, 0, 0)
    predictions: list[tuple[str, float, bool, bool]] = []
    for fold_index, test_idx in enumerate(folds):
        test_set = set(test_idx)
        train = [s for i, s in enumerate(data) if i not in test_set]
        test = [data[i] for i in test_idx]
        model = train_forest(train, forest)
        preds: list[bool] = []
        truths: list[bool] = []
        for sample in test:
            row = np.asarray(sample.features, dtype=np.float64).reshape(1, -1)
            score = float(model.predict_score(row)[0])
            label = score >= model.config.threshold
            preds.append(label)
            truths.append(sample.truth)
            predictions.append((sample.mutant_id, score, label, sample.truth))
        cm = ConfusionMatrix.from_labels(preds, truths)
        pooled_cm = pooled_cm + cm
        fold_reports.append(
            FoldReport(
                fold_index=fold_index,
                test_groups=tuple(sorted({s.group_id for s in test})),
                n_test=len(test),
                report=report_from_matrix(cm),
            )
        )
    averaged = {
        "precision": fmean(f.report.precision for f in fold_reports),
        "recall": fmean(f.report.recall for f in fold_reports),
        "mcc": fmean(f.report.mcc for f in fold_reports),
    }
    return CrossValReport(
        folds=tuple(fold_reports),
        pooled=report_from_matrix(pooled_cm),
        averaged=averaged,
        predictions=tuple(sorted(predictions, key=lambda r: r[0])),
    )
