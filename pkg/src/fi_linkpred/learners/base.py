from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

FAMILIES = ("naive_bayes", "random_forest", "neural_net", "c50_boosted_tree", "svm_linear", "knn")

# Tuning grids, listed simplest-first: tune() keeps the first point reaching the best accuracy.
GRIDS = {
    "naive_bayes": [{"distribution": "gaussian"}],
    "random_forest": [{"mtry": 2}, {"mtry": 5}, {"mtry": 8}],
    "neural_net": [
        {"hidden_units": h, "weight_decay": wd} for h in (1, 3, 5) for wd in (1e-1, 1e-4, 0.0)
    ],
    "c50_boosted_tree": [{"trials": 1}, {"trials": 10}, {"trials": 20}],
    "svm_linear": [{"cost": 0.25}, {"cost": 0.5}, {"cost": 1.0}],
    "knn": [{"k": 5}, {"k": 7}, {"k": 9}],
}

DEFAULTS = {
    "naive_bayes": {"distribution": "gaussian", "var_floor": 1e-9},
    "random_forest": {"mtry": 2, "n_trees": 500, "max_depth": -1, "bootstrap": True},
    "neural_net": {"hidden_units": 1, "weight_decay": 1e-4, "learning_rate": 0.1, "steps": 5000, "init_range": 0.7},
    "c50_boosted_tree": {"trials": 10, "max_depth": 3},
    "svm_linear": {"cost": 0.25, "epochs": 10000},
    "knn": {"k": 5},
}

STANDARDIZE = {
    "naive_bayes": False,
    "random_forest": False,
    "neural_net": True,
    "c50_boosted_tree": False,
    "svm_linear": True,
    "knn": True,
}


class LearnerError(ValueError):
    pass


class SchemaError(LearnerError):
    pass


def _check_int(hp, key, lo, hi=None):
    v = hp[key]
    if isinstance(v, bool) or int(v) != v or v < lo or (hi is not None and v > hi):
        raise LearnerError(f"invalid {key}={v!r}")


def validate_hyperparameters(family: str, hp: dict) -> dict:
    if family not in FAMILIES:
        raise LearnerError(f"unknown model family {family!r}")
    unknown = set(hp) - set(DEFAULTS[family])
    if unknown:
        raise LearnerError(f"unknown hyperparameters for {family}: {sorted(unknown)}")
    full = {**DEFAULTS[family], **hp}
    if family == "naive_bayes":
        if full["distribution"] != "gaussian":
            raise LearnerError("only the gaussian distribution is supported")
        if not full["var_floor"] > 0:
            raise LearnerError("var_floor must be > 0")
    elif family == "random_forest":
        _check_int(full, "mtry", 1)
        _check_int(full, "n_trees", 1)
        _check_int(full, "max_depth", -1)
        if not isinstance(full["bootstrap"], bool):
            raise LearnerError(f"invalid bootstrap={full['bootstrap']!r}")
    elif family == "neural_net":
        _check_int(full, "hidden_units", 1)
        _check_int(full, "steps", 0)
        if not full["weight_decay"] >= 0 or not full["learning_rate"] > 0 or not full["init_range"] > 0:
            raise LearnerError(f"invalid neural_net hyperparameters {full}")
    elif family == "c50_boosted_tree":
        _check_int(full, "trials", 1)
        _check_int(full, "max_depth", -1)
    elif family == "svm_linear":
        if not full["cost"] > 0:
            raise LearnerError(f"invalid cost={full['cost']!r}")
        _check_int(full, "epochs", 1)
    elif family == "knn":
        _check_int(full, "k", 1)
    return full


@dataclass(frozen=True)
class ModelSpec:
    family: str
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0
    standardize: bool | None = None

    def __post_init__(self):
        hp = validate_hyperparameters(self.family, dict(self.hyperparameters))
        object.__setattr__(self, "hyperparameters", hp)
        if self.standardize is None:
            object.__setattr__(self, "standardize", STANDARDIZE[self.family])

    def with_hyperparameters(self, **hp) -> "ModelSpec":
        return ModelSpec(self.family, {**self.hyperparameters, **hp}, self.seed, self.standardize)

    def to_dict(self) -> dict:
        return {"family": self.family, "hyperparameters": dict(self.hyperparameters),
                "seed": int(self.seed), "standardize": bool(self.standardize)}


@dataclass
class TrainedModel:
    spec: ModelSpec
    state: dict[str, Any]
    columns: tuple  # column ids (str) the model was trained on
    mean: np.ndarray | None = None
    scale: np.ndarray | None = None
    provenance: dict = field(default_factory=dict)

    @property
    def family(self) -> str:
        return self.spec.family

    def transform(self, X: np.ndarray) -> np.ndarray:
        if self.mean is None:
            return X
        return (X - self.mean) / self.scale


def check_xy(X, y=None):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise LearnerError(f"expected a 2-D score matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise LearnerError("NaN or infinite value in inputs")
    if y is None:
        return X
    y = np.asarray(y).astype(np.int64)
    if y.shape != (X.shape[0],):
        raise LearnerError("label vector does not match rows")
    if not set(np.unique(y)) <= {0, 1}:
        raise LearnerError("labels must be 0 (wanted) or 1 (unwanted)")
    if not (y == 1).any() or not (y == 0).any():
        raise LearnerError("training data must contain both classes (empty class)")
    return X, y


def fit_standardizer(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    return mean, scale
