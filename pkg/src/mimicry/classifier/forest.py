"""Random forest over sequence embeddings.

Plain CART trees with Gini impurity, floor(sqrt(d)) features examined
per node, and bootstrap samples the size of the training set. Every
source of randomness derives from the master seed via a per-tree
SeedSequence, so a trained forest is reproducible bit for bit.
"""
from __future__ import annotations

import csv
import json
import math
import struct
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..errors import ConfigInvalid, DegenerateDataset, DimensionMismatch, LengthMismatch
from . import kernels

_MAGIC = b"MIMFORST"
_VERSION = 1


@dataclass(frozen=True)
class LabeledSample:
    mutant_id: str
    group_id: str
    features: np.ndarray
    truth: bool


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    min_samples_leaf: int = 1
    threshold: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ConfigInvalid(f"n_trees must be >= 1, got {self.n_trees}")
        if self.min_samples_leaf < 1:
            raise ConfigInvalid(
                f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}"
            )
        if not 0.0 < self.threshold <= 1.0:
            raise ConfigInvalid(f"threshold must be in (0, 1], got {self.threshold}")
        if self.seed < 0:
            raise ConfigInvalid(f"seed must be non-negative, got {self.seed}")

    def to_json(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "min_samples_leaf": self.min_samples_leaf,
            "threshold": self.threshold,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ForestConfig":
        return cls(
            n_trees=obj["n_trees"],
            min_samples_leaf=obj["min_samples_leaf"],
            threshold=obj["threshold"],
            seed=obj["seed"],
        )


def tree_rng(master_seed: int, tree_index: int) -> np.random.Generator:
    """Per-tree generator; the (seed, index) pair fixes the whole stream."""
    return np.random.default_rng(np.random.SeedSequence([master_seed, tree_index]))


def bootstrap_indices(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.integers(0, n, size=n)


def feature_subset(rng: np.random.Generator, d: int) -> np.ndarray:
    m = max(1, math.isqrt(d))
    return np.sort(rng.choice(d, size=m, replace=False))


def _gini(pos: int, tot: int) -> float:
    p = pos / tot
    q = (tot - pos) / tot
    return 1.0 - p * p - q * q


SplitObserver = Callable[[np.ndarray, np.ndarray, int, float, float], None]


def _build_tree(
    X: np.ndarray,
    y: np.ndarray,
    rng: np.random.Generator,
    cfg: ForestConfig,
    on_split: SplitObserver | None = None,
) -> dict:
    n, d = X.shape
    boot = bootstrap_indices(rng, n)
    root: dict = {}
    # Pre-order, left child first; an explicit stack keeps deep trees off
    # the interpreter's recursion limit.
    stack: list[tuple[np.ndarray, dict]] = [(boot, root)]
    while stack:
        idx, node = stack.pop()
        ys = y[idx]
        tot = int(idx.shape[0])
        pos = int(ys.sum())
        if pos == 0 or pos == tot or tot < 2 * cfg.min_samples_leaf or tot < 2:
            node["n"] = tot
            node["p"] = pos
            continue
        parent = _gini(pos, tot)
        feats = feature_subset(rng, d)
        best_w = math.inf
        best_f = -1
        best_t = math.nan
        for f in feats:
            vals = X[idx, f]
            order = np.argsort(vals, kind="mergesort")
            sv = np.ascontiguousarray(vals[order], dtype=np.float64)
            sl = np.ascontiguousarray(ys[order], dtype=np.float64)
            w, thr = kernels.best_split_sorted(sv, sl, cfg.min_samples_leaf)
            if w < best_w:
                best_w = w
                best_f = int(f)
                best_t = thr
        if not math.isfinite(best_w) or best_w >= parent:
            node["n"] = tot
            node["p"] = pos
            continue
        if on_split is not None:
            on_split(idx, feats, best_f, best_t, best_w)
        mask = X[idx, best_f] <= best_t
        left_idx = idx[mask]
        right_idx = idx[~mask]
        node["f"] = best_f
        node["t"] = best_t
        node["l"] = {}
        node["r"] = {}
        stack.append((right_idx, node["r"]))
        stack.append((left_idx, node["l"]))
    return root


def _predict_node(node: dict, row: np.ndarray) -> bool:
    while "f" in node:
        node = node["l"] if row[node["f"]] <= node["t"] else node["r"]
    return node["p"] * 2 > node["n"]


@dataclass(frozen=True)
class Tree:
    root: dict

    def predict_row(self, row: np.ndarray) -> bool:
        return _predict_node(self.root, row)


@dataclass(frozen=True)
class Forest:
    config: ForestConfig
    n_features: int
    trees: tuple[Tree, ...] = field(repr=False)

    def _check(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionMismatch(
                f"expected (_, {self.n_features}) feature matrix, got {X.shape}"
            )
        return X

    def predict_score(self, X: np.ndarray) -> np.ndarray:
        """Fraction of trees voting positive, per row."""
        X = self._check(X)
        votes = np.zeros(X.shape[0], dtype=np.float64)
        for tree in self.trees:
            for i in range(X.shape[0]):
                if tree.predict_row(X[i]):
                    votes[i] += 1.0
        return votes / len(self.trees)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.predict_score(X) >= self.config.threshold


def predict(model: Forest, features: Sequence[float] | np.ndarray) -> tuple[bool, float]:
    """Label and vote fraction for one feature vector."""
    row = np.asarray(features, dtype=np.float64)
    if row.ndim != 1 or row.shape[0] != model.n_features:
        raise DimensionMismatch(
            f"expected a vector of {model.n_features} features, got shape {row.shape}"
        )
    score = float(model.predict_score(row.reshape(1, -1))[0])
    return score >= model.config.threshold, score


def _to_arrays(data: Sequence[LabeledSample]) -> tuple[np.ndarray, np.ndarray]:
    if not data:
        raise DegenerateDataset("training set is empty")
    dims = {len(np.asarray(s.features).ravel()) for s in data}
    if len(dims) != 1:
        raise DimensionMismatch(f"inconsistent feature lengths: {sorted(dims)}")
    X = np.array([np.asarray(s.features, dtype=np.float64).ravel() for s in data])
    y = np.array([s.truth for s in data], dtype=np.float64)
    return X, y


def train_on_arrays(
    X: np.ndarray,
    y: np.ndarray,
    cfg: ForestConfig | None = None,
    allow_degenerate: bool = False,
    on_split: SplitObserver | None = None,
) -> Forest:
    cfg = cfg or ForestConfig()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=bool).astype(np.float64)
    if X.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D feature matrix, got shape {X.shape}")
    if X.shape[0] != y.shape[0]:
        raise LengthMismatch(f"{X.shape[0]} rows but {y.shape[0]} labels")
    if X.shape[0] < 2:
        raise DegenerateDataset(f"need at least 2 samples, got {X.shape[0]}")
    pos = int(y.sum())
    if not allow_degenerate and (pos == 0 or pos == y.shape[0]):
        raise DegenerateDataset("training labels contain a single class")
    trees = tuple(
        Tree(root=_build_tree(X, y, tree_rng(cfg.seed, t), cfg, on_split))
        for t in range(cfg.n_trees)
    )
    return Forest(config=cfg, n_features=int(X.shape[1]), trees=trees)


def train_forest(
    data: Sequence[LabeledSample],
    cfg: ForestConfig | None = None,
    allow_degenerate: bool = False,
) -> Forest:
    X, y = _to_arrays(data)
    return train_on_arrays(X, y, cfg, allow_degenerate)


def _flatten_tree(root: dict) -> dict[str, np.ndarray]:
    feats: list[int] = []
    thrs: list[float] = []
    lefts: list[int] = []
    rights: list[int] = []
    counts: list[int] = []
    poss: list[int] = []
    stack: list[tuple[dict, int, str]] = [(root, -1, "")]
    while stack:
        node, parent, side = stack.pop()
        i = len(feats)
        if parent >= 0:
            (lefts if side == "l" else rights)[parent] = i
        if "f" in node:
            feats.append(node["f"])
            thrs.append(node["t"])
            lefts.append(-1)
            rights.append(-1)
            counts.append(0)
            poss.append(0)
            stack.append((node["r"], i, "r"))
            stack.append((node["l"], i, "l"))
        else:
            feats.append(-1)
            thrs.append(0.0)
            lefts.append(-1)
            rights.append(-1)
            counts.append(node["n"])
            poss.append(node["p"])
    return {
        "feature": np.array(feats, dtype="<i4"),
        "threshold": np.array(thrs, dtype="<f8"),
        "left": np.array(lefts, dtype="<i4"),
        "right": np.array(rights, dtype="<i4"),
        "count": np.array(counts, dtype="<i4"),
        "pos": np.array(poss, dtype="<i4"),
    }


def _unflatten_tree(arrays: dict[str, np.ndarray]) -> dict:
    n = arrays["feature"].shape[0]
    nodes: list[dict] = [{} for _ in range(n)]
    # In pre-order, children always come after their parent, so a reverse
    # sweep can link finished subtrees.
    for i in range(n - 1, -1, -1):
        f = int(arrays["feature"][i])
        if f < 0:
            nodes[i]["n"] = int(arrays["count"][i])
            nodes[i]["p"] = int(arrays["pos"][i])
        else:
            nodes[i]["f"] = f
            nodes[i]["t"] = float(arrays["threshold"][i])
            nodes[i]["l"] = nodes[int(arrays["left"][i])]
            nodes[i]["r"] = nodes[int(arrays["right"][i])]
    return nodes[0]


_TREE_FIELDS = ("feature", "threshold", "left", "right", "count", "pos")
_FIELD_DTYPES = {"feature": "<i4", "threshold": "<f8", "left": "<i4",
                 "right": "<i4", "count": "<i4", "pos": "<i4"}


def save_forest(path, forest: Forest) -> None:
    flat = [_flatten_tree(t.root) for t in forest.trees]
    header = {
        "config": forest.config.to_json(),
        "n_features": forest.n_features,
        "tree_sizes": [int(f["feature"].shape[0]) for f in flat],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, len(blob)))
        fh.write(blob)
        for arrays in flat:
            for name in _TREE_FIELDS:
                fh.write(arrays[name].tobytes())


def load_forest(path) -> Forest:
    with open(path, "rb") as fh:
        magic = fh.read(len(_MAGIC))
        if magic != _MAGIC:
            raise ConfigInvalid(f"not a forest file (bad magic): {path}")
        version, hlen = struct.unpack("<II", fh.read(8))
        if version != _VERSION:
            raise ConfigInvalid(f"unsupported forest version {version} in {path}")
        header = json.loads(fh.read(hlen).decode("utf-8"))
        trees = []
        for size in header["tree_sizes"]:
            arrays: dict[str, np.ndarray] = {}
            for name in _TREE_FIELDS:
                dtype = np.dtype(_FIELD_DTYPES[name])
                raw = fh.read(size * dtype.itemsize)
                if len(raw) != size * dtype.itemsize:
                    raise ConfigInvalid(f"truncated forest file: {path}")
                arrays[name] = np.frombuffer(raw, dtype=dtype)
            trees.append(Tree(root=_unflatten_tree(arrays)))
    return Forest(
        config=ForestConfig.from_json(header["config"]),
        n_features=header["n_features"],
        trees=tuple(trees),
    )


def write_predictions(path, rows: Sequence[tuple[str, float, bool, bool]]) -> None:
    """CSV of (mutant_id, score, label, truth), sorted by mutant_id."""
    ordered = sorted(rows, key=lambda r: r[0])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mutant_id", "score", "label", "truth"])
        for mutant_id, score, lab, truth in ordered:
            writer.writerow(
                [mutant_id, repr(float(score)), str(bool(lab)).lower(), str(bool(truth)).lower()]
            )


def read_predictions(path) -> list[tuple[str, float, bool, bool]]:
    out: list[tuple[str, float, bool, bool]] = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(
                (
                    row["mutant_id"],
                    float(row["score"]),
                    row["label"] == "true",
                    row["truth"] == "true",
                )
            )
    return out
