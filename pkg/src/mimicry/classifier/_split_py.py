"""Pure-Python (numpy) threshold search used when the compiled kernel is absent.

Contract shared with the compiled variant: inputs are the node's samples
for ONE feature, already sorted ascending by value, labels as float64
zeros/ones in the same order. Returns ``(weighted_gini, threshold)`` for
the best midpoint threshold whose sides both hold at least ``min_leaf``
samples, with ``weighted_gini == inf`` when no boundary qualifies.
Ties prefer the lowest threshold.
"""
from __future__ import annotations

import numpy as np


def best_split_sorted(
    values: np.ndarray, labels: np.ndarray, min_leaf: int = 1
) -> tuple[float, float]:
    n = values.shape[0]
    if n < 2 * min_leaf or n < 2 or values[0] == values[n - 1]:
        return float("inf"), float("nan")

    total_pos = float(labels.sum())
    nf = float(n)

    # Boundary i separates [0..i] from [i+1..n-1].
    pl = np.cumsum(labels)[:-1]
    nl = np.arange(1, n, dtype=np.float64)
    nr = nf - nl
    pr = total_pos - pl

    pl_frac = pl / nl
    ql_frac = (nl - pl) / nl
    gini_l = 1.0 - pl_frac * pl_frac - ql_frac * ql_frac
    pr_frac = pr / nr
    qr_frac = (nr - pr) / nr
    gini_r = 1.0 - pr_frac * pr_frac - qr_frac * qr_frac
    weighted = (nl * gini_l + nr * gini_r) / nf

    valid = values[:-1] != values[1:]
    if min_leaf > 1:
        valid = valid & (nl >= min_leaf) & (nr >= min_leaf)
    weighted = np.where(valid, weighted, np.inf)

    # argmin takes the first minimum; midpoints ascend with the sort order,
    # so the first minimum is also the lowest threshold.
    idx = int(np.argmin(weighted))
    if not np.isfinite(weighted[idx]):
        return float("inf"), float("nan")
    thr = (values[idx] + values[idx + 1]) / 2.0
    return float(weighted[idx]), float(thr)
