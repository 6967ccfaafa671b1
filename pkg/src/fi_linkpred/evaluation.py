"""Tuning by cross-validation, variable importance, leave-one-out link detection
and the end-to-end evaluation pipeline."""
from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field, asdict

import numpy as np

from . import learners
from .dataset import (
    EdgeDataset,
    FoldPlan,
    build_dataset,
    derive_seed,
    require_both_classes,
    stratified_kfold,
    stratified_split,
)
from .graph import FeatureGraph, GraphError, all_pairs
from .learners import FAMILIES, GRIDS, ModelSpec, TrainedModel
from .similarity import METRICS, MetricId, MetricParams, metric_matrices, pair_scores, score_table

log = logging.getLogger(__name__)

ACC_EPS = 1e-12


class Infeasible(Exception):
    """A fold's training complement lacks one of the classes."""


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")


# -- cross-validation and tuning -------------------------------------------

def cross_validate(spec: ModelSpec, X, y, fold_plan: FoldPlan, columns=None) -> float:
    """Unweighted mean of per-fold accuracies over non-empty folds."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).astype(np.int64)
    if len(fold_plan.fold_assignments) != len(y):
        raise ValueError("fold plan does not cover the rows")
    assign = np.asarray(fold_plan.fold_assignments)
    accs = []
    for f in range(fold_plan.k):
        test = assign == f
        if not test.any():
            continue
        train = ~test
        if len(np.unique(y[train])) < 2:
            raise Infeasible(f"fold {f}: training complement has a single class")
        m = learners.train(spec, X[train], y[train], columns)
        accs.append(learners.accuracy(m, X[test], y[test]))
    return float(np.mean(accs))


@dataclass
class TuningResult:
    family: str
    grid: list  # [{"hyperparameters": {...}, "cv_accuracy": float | None}]
    best_spec: ModelSpec
    best_cv_accuracy: float

    def to_dict(self) -> dict:
        return {"family": self.family, "grid": self.grid, "best_spec": self.best_spec.to_dict(),
                "best_cv_accuracy": self.best_cv_accuracy}


def tune(family: str, grid, X, y, fold_plan: FoldPlan, seed: int = 0, columns=None) -> TuningResult:
    """Cross-validate each grid point; keep the first (simplest) point reaching the best accuracy."""
    grid = list(grid)
    if not grid:
        raise ValueError("empty tuning grid")
    table, best = [], None
    for hp in grid:
        spec = ModelSpec(family, hp, seed)
        try:
            acc = cross_validate(spec, X, y, fold_plan, columns)
        except Infeasible as exc:
            log.info("%s %s infeasible: %s", family, hp, exc)
            acc = None
        table.append({"hyperparameters": dict(hp), "cv_accuracy": acc})
        if acc is not None and (best is None or acc > best[1] + ACC_EPS):
            best = (spec, acc)
    if best is None:
        raise Infeasible(f"{family}: every grid point is infeasible")
    return TuningResult(family, table, best[0], best[1])


# -- importance -----------------------------------------------------------

@dataclass
class ImportanceRanking:
    method: str  # auc_filter | forest_impurity | tree_usage | network_weights
    scores: dict  # metric id -> importance

    @property
    def ranking(self) -> list:
        return sorted(self.scores, key=lambda m: (-self.scores[m], m))

    def to_dict(self) -> dict:
        return {"method": self.method, "scores": dict(self.scores), "ranking": self.ranking}


def auc_filter_importance(X, y, columns=METRICS) -> ImportanceRanking:
    """Model-free importance: each raw column used as a classifier score, max(AUC, 1 - AUC)."""
    X = np.asarray(X, dtype=np.float64)
    scores = {}
    for j, col in enumerate(columns):
        auc = learners.roc_auc(X[:, j], y)
        scores[str(col)] = max(auc, 1.0 - auc)
    return ImportanceRanking("auc_filter", scores)


def model_importance(m: TrainedModel, X_train=None) -> ImportanceRanking:
    """Built-in importance for tree ensembles and the network.

    ``X_train`` (raw, untransformed) is required for boosted trees, whose
    importance is the share of training rows routed through each column.
    """
    d = len(m.columns)
    if m.family == "random_forest":
        imp = learners.trees.impurity_importance(m.state, d)
        method = "forest_impurity"
    elif m.family == "c50_boosted_tree":
        if X_train is None:
            raise ValueError("tree_usage importance needs the training rows")
        imp = learners.trees.usage_importance(m.state, m.transform(np.asarray(X_train, dtype=float)), d)
        method = "tree_usage"
    elif m.family == "neural_net":
        imp = learners.neural.garson(m.state)
        method = "network_weights"
    else:
        raise ValueError(f"{m.family} has no built-in importance; use auc_filter_importance")
    return ImportanceRanking(method, {c: float(v) for c, v in zip(m.columns, imp)})


# -- leave-one-out detection -------------------------------------------------

@dataclass
class LooDetectionResult:
    metrics: tuple
    per_edge: list  # [{"edge", "n_candidates", "rank": {m: int}, "optimistic_rank": {m: int}, "auc": {m: float}}]
    detections: dict  # metric -> number of held-out edges ranked first

    def to_dict(self) -> dict:
        return {"metrics": [str(m) for m in self.metrics], "per_edge": self.per_edge,
                "detections": dict(self.detections)}


def loo_detection(g: FeatureGraph, params: MetricParams = MetricParams(), metric_set=METRICS) -> LooDetectionResult:
    """Hold out each unwanted edge, rescore the reduced graph, rank the edge among its non-edges."""
    g = g.unwanted_subgraph()
    edges = g.edge_list()
    if len(edges) < 2:
        raise GraphError("leave-one-out detection needs at least 2 unwanted edges")
    metric_set = tuple(MetricId(m) for m in metric_set)
    idx = g.index()
    per_edge = []
    detections = {str(m): 0 for m in metric_set}
    for a, b in edges:
        reduced = g.without_edge(a, b)
        try:
            mats = metric_matrices(reduced, params)
        except Exception as exc:
            raise RuntimeError(f"metric failure with held-out edge {a}-{b}: {exc}") from exc
        candidates = [(p, q) for p, q, _ in all_pairs(reduced) if (p, q) not in reduced.edges]
        row = {"edge": [a, b], "n_candidates": len(candidates), "rank": {}, "optimistic_rank": {}, "auc": {}}
        for m in metric_set:
            M = mats[m]
            # 12 significant digits: equal-in-exact-arithmetic scores tie instead of
            # being ordered by rounding noise
            s = {pq: float(format(M[idx[pq[0]], idx[pq[1]]], ".12g")) for pq in candidates}
            ordered = sorted(candidates, key=lambda pq: (-s[pq], pq))
            rank = ordered.index((a, b)) + 1
            target = s[(a, b)]
            others = [s[pq] for pq in candidates if pq != (a, b)]
            greater = sum(v > target for v in others)
            ties = sum(v == target for v in others)
            less = len(others) - greater - ties
            row["rank"][str(m)] = rank
            row["optimistic_rank"][str(m)] = greater + 1
            row["auc"][str(m)] = (less + 0.5 * ties) / len(others) if others else 1.0
            if rank == 1:
                detections[str(m)] += 1
        per_edge.append(row)
    return LooDetectionResult(metric_set, per_edge, detections)


# -- candidate classification ---------------------------------------------

def classify_candidates(g: FeatureGraph, m: TrainedModel, params: MetricParams, candidate_pairs):
    """Score candidate pairs on ``g``'s unwanted subgraph and classify them with ``m``."""
    expected = tuple(mid.value for mid in METRICS)
    if tuple(m.columns) != expected:
        raise learners.SchemaError(f"model schema {m.columns} does not match {expected}")
    pairs = []
    for a, b in candidate_pairs:
        for name in (a, b):
            if name not in g.features:
                raise GraphError(f"unknown feature {name!r} in candidate pair {a}-{b}")
        if a == b:
            raise GraphError(f"candidate pair {a}-{b} is a self-pair")
        pairs.append((a, b) if a < b else (b, a))
    if not pairs:
        return []
    mats = metric_matrices(g, params)
    X = pair_scores(mats, g.index(), pairs)
    scores = learners.predict_scores(m, X)
    return [(p, learners.label_for_score(s), float(s)) for p, s in zip(pairs, scores)]


# -- pipeline -------------------------------------------------------------

@dataclass(frozen=True)
class PipelineConfig:
    train_fraction: float = 0.8
    k_folds: int = 10
    families: tuple = FAMILIES
    loo_metrics: tuple = tuple(m.value for m in METRICS)

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError(f"train_fraction must be in (0, 1), got {self.train_fraction}")
        if int(self.k_folds) < 2:
            raise ValueError(f"k_folds must be >= 2, got {self.k_folds}")
        bad = [f for f in self.families if f not in FAMILIES]
        if bad or not self.families:
            raise ValueError(f"unknown model families {bad}")
        for mname in self.loo_metrics:
            MetricId(mname)
        # canonical family order keeps reports independent of how they were listed
        object.__setattr__(self, "families", tuple(f for f in FAMILIES if f in set(self.families)))

    def to_dict(self) -> dict:
        return {"train_fraction": self.train_fraction, "k_folds": self.k_folds,
                "families": list(self.families), "loo_metrics": list(self.loo_metrics)}


@dataclass
class EvaluationReport:
    seed: int
    config: dict
    metric_params: dict
    provenance: dict
    dataset: dict
    split: dict
    folds: dict
    tuning: dict  # family -> TuningResult dict
    test_metrics: dict  # family -> ClassMetrics dict
    importance: dict  # family (or "dataset") -> ImportanceRanking dict
    loo: dict
    models: dict = field(default_factory=dict, repr=False)  # family -> TrainedModel, not serialized

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("models")
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def config_digest(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()[:16]


def pipeline_digest(g: FeatureGraph, params: MetricParams, seed: int, cfg: dict) -> str:
    return config_digest({"config": cfg, "params": params.to_dict(), "seed": int(seed), "graph": g.digest()})


def _stage(name):
    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, et, ev, tb):
            if ev is not None and not isinstance(ev, PipelineError):
                raise PipelineError(name, ev) from ev
            return False
    return _Ctx()


def fit_family(family: str, train: EdgeDataset, fold_plan: FoldPlan, master_seed: int, grid=None):
    """Tune ``family`` on the training rows, then refit the winner on all of them."""
    seed = derive_seed(master_seed, f"learner:{family}")
    res = tune(family, GRIDS[family] if grid is None else grid, train.X, train.y, fold_plan, seed,
               train.column_ids)
    model = learners.train(res.best_spec, train.X, train.y, train.column_ids, train.provenance)
    return res, model


def run_pipeline(g: FeatureGraph, params: MetricParams = MetricParams(), seed: int = 42,
                 config: PipelineConfig = PipelineConfig(), run_config: dict | None = None) -> EvaluationReport:
    """score_table -> dataset -> split -> tune/refit/test per family -> importance -> LOO."""
    with _stage("similarity"):
        table = score_table(g, params)
    with _stage("dataset"):
        ds = build_dataset(table, g, params)
        require_both_classes(ds)
    with _stage("split"):
        split = stratified_split(ds, config.train_fraction, derive_seed(seed, "split"))
        train, test = ds.subset(split.train_indices), ds.subset(split.test_indices)
        k = min(int(config.k_folds), len(train))
        folds = stratified_kfold(train, k, derive_seed(seed, "folds"))

    tuning, test_metrics, importance, models = {}, {}, {}, {}
    for family in config.families:
        with _stage(f"train:{family}"):
            res, model = fit_family(family, train, folds, seed)
        tuning[family] = res.to_dict()
        models[family] = model
        with _stage(f"test:{family}"):
            test_metrics[family] = learners.confusion_metrics(model, test.X, test.y).to_dict()
        with _stage(f"importance:{family}"):
            if family in ("random_forest", "c50_boosted_tree", "neural_net"):
                rk = model_importance(model, train.X)
            else:
                rk = auc_filter_importance(train.X, train.y, train.columns)
            importance[family] = rk.to_dict()
    with _stage("importance:dataset"):
        importance["dataset"] = auc_filter_importance(ds.X, ds.y, ds.columns).to_dict()
    with _stage("loo"):
        loo = loo_detection(g, params, config.loo_metrics).to_dict()

    cfg = config.to_dict()
    digest = pipeline_digest(g, params, seed, cfg)
    if run_config is not None:
        cfg["run"] = run_config
    return EvaluationReport(
        seed=int(seed),
        config=cfg,
        metric_params=params.to_dict(),
        provenance={"graph_digest": g.digest(), "config_digest": digest},
        dataset={"rows": len(ds), **ds.class_counts(), "pairs": [list(p) for p in ds.pairs]},
        split=json.loads(split.to_json()),
        folds=json.loads(folds.to_json()),
        tuning=tuning,
        test_metrics=test_metrics,
        importance=importance,
        loo=loo,
        models=models,
    )
