"""Labeled edge dataset, stratified holdout split and stratified k-fold plans."""
from __future__ import annotations

import json
import math
import zlib
from dataclasses import dataclass, field

import numpy as np

from .graph import FeatureGraph, InteractionLabel, all_pairs
from .similarity import METRICS, MetricParams, SimilarityTable, table_to_csv


class DatasetError(ValueError):
    pass


def derive_seed(master: int, tag: str, index: int = 0) -> int:
    """Independent 64-bit sub-seed for (master seed, stage tag, index).

    Counter-based: each (tag, index) gets its own SeedSequence spawn key, so
    adding a stage or a learner never shifts the draws of another.
    """
    ss = np.random.SeedSequence(int(master) & (2**64 - 1), spawn_key=(zlib.crc32(tag.encode()), int(index)))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return int(hi) << 32 | int(lo)


@dataclass(frozen=True)
class EdgeDataset:
    pairs: list
    X: np.ndarray  # (rows, 8) scores in METRICS order
    labels: list  # InteractionLabel per row
    columns: tuple = METRICS
    provenance: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def y(self) -> np.ndarray:
        """1 for unwanted rows, 0 for wanted."""
        return np.array([lab == InteractionLabel.UNWANTED for lab in self.labels], dtype=np.int64)

    @property
    def column_ids(self) -> tuple:
        return tuple(m.value for m in self.columns)

    def subset(self, indices) -> "EdgeDataset":
        idx = list(indices)
        return EdgeDataset([self.pairs[i] for i in idx], self.X[idx], [self.labels[i] for i in idx],
                           self.columns, self.provenance)

    def class_counts(self) -> dict:
        y = self.y
        return {"unwanted": int(y.sum()), "wanted": int(len(y) - y.sum())}

    def to_csv(self, header_comments=()) -> str:
        return table_to_csv(self.pairs, self.X, self.labels, self.columns, header_comments)


def build_dataset(table: SimilarityTable, g: FeatureGraph, params: MetricParams | None = None) -> EdgeDataset:
    """One row per unordered pair of ``g``, labeled from the graph."""
    expected = all_pairs(g)
    have = {p: i for i, p in enumerate(table.pairs)}
    order = []
    for a, b, _ in expected:
        if (a, b) not in have:
            raise DatasetError(f"similarity table has no row for pair {a}-{b}")
        order.append(have[(a, b)])
    extra = set(have) - {(a, b) for a, b, _ in expected}
    if extra:
        a, b = sorted(extra)[0]
        raise DatasetError(f"similarity table has pair {a}-{b} that is not in the graph")
    X = np.asarray(table.scores, dtype=np.float64)[order]
    if X.size and not np.all(np.isfinite(X)):
        raise DatasetError("non-finite score in similarity table")
    prov = {"graph_digest": g.digest()}
    if params is not None:
        prov["metric_params"] = params.to_dict()
    return EdgeDataset([(a, b) for a, b, _ in expected], X, [lab for _, _, lab in expected],
                       tuple(table.columns), prov)


def require_both_classes(ds: EdgeDataset) -> None:
    counts = ds.class_counts()
    if counts["unwanted"] == 0 or counts["wanted"] == 0:
        raise DatasetError(f"single-class dataset ({counts['unwanted']} unwanted, {counts['wanted']} wanted)")


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5 + 1e-9))


def _labels_of(ds_or_y) -> np.ndarray:
    if isinstance(ds_or_y, EdgeDataset):
        return ds_or_y.y
    return np.asarray(ds_or_y).astype(np.int64)


@dataclass(frozen=True)
class SplitPlan:
    train_indices: list
    test_indices: list
    seed: int
    train_fraction: float

    def to_json(self) -> str:
        return json.dumps({"kind": "stratified_split", "seed": self.seed, "train_fraction": self.train_fraction,
                           "train_indices": self.train_indices, "test_indices": self.test_indices}, sort_keys=True)


def stratified_split(ds, train_fraction: float, seed: int) -> SplitPlan:
    """Per-class holdout: test count per class = round_half_up(size * (1 - f)), kept in [1, size-1]."""
    if not 0 < train_fraction < 1:
        raise DatasetError(f"train_fraction must be in (0, 1), got {train_fraction}")
    y = _labels_of(ds)
    rng = np.random.default_rng(int(seed))
    train, test = [], []
    for cls in (1, 0):
        members = np.flatnonzero(y == cls)
        size = len(members)
        if size < 2:
            name = "unwanted" if cls == 1 else "wanted"
            raise DatasetError(f"class {name!r} has {size} row(s); need >= 2 to place one on each side")
        n_test = min(max(_round_half_up(size * (1 - train_fraction)), 1), size - 1)
        perm = rng.permutation(members)
        test.extend(int(i) for i in perm[:n_test])
        train.extend(int(i) for i in perm[n_test:])
    return SplitPlan(sorted(train), sorted(test), int(seed), float(train_fraction))


@dataclass(frozen=True)
class FoldPlan:
    k: int
    fold_assignments: list  # fold id per row
    seed: int

    def folds(self) -> list:
        return [[i for i, f in enumerate(self.fold_assignments) if f == j] for j in range(self.k)]

    def to_json(self) -> str:
        return json.dumps({"kind": "stratified_kfold", "k": self.k, "seed": self.seed,
                           "fold_assignments": self.fold_assignments}, sort_keys=True)


def stratified_kfold(ds, k: int, seed: int) -> FoldPlan:
    """Shuffle each class, then deal rows round-robin across folds, classes back to back.

    Dealing continues where the previous class stopped, so fold sizes differ by
    at most one and so do per-class counts.
    """
    y = _labels_of(ds)
    n = len(y)
    if not 2 <= k <= n:
        raise DatasetError(f"k must be in [2, {n}], got {k}")
    rng = np.random.default_rng(int(seed))
    assign = [-1] * n
    pos = 0
    for cls in (1, 0):
        for i in rng.permutation(np.flatnonzero(y == cls)):
            assign[int(i)] = pos % k
            pos += 1
    return FoldPlan(int(k), assign, int(seed))
