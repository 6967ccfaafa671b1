"""Six classifier families, trained from scratch, plus classification metrics."""
from __future__ import annotations

import json

import numpy as np

from ..graph import InteractionLabel
from . import knn, naive_bayes, neural, svm, trees
from .base import (
    DEFAULTS,
    FAMILIES,
    GRIDS,
    STANDARDIZE,
    LearnerError,
    ModelSpec,
    SchemaError,
    TrainedModel,
    check_xy,
    fit_standardizer,
)
from .metrics import ClassMetrics, as_positive, metrics_from_labels, roc_auc

FORMAT_VERSION = 1
DECISION_THRESHOLD = 0.5  # score >= threshold -> unwanted

_FIT = {
    "naive_bayes": naive_bayes.fit,
    "random_forest": trees.fit_forest,
    "neural_net": neural.fit,
    "c50_boosted_tree": trees.fit_boosted,
    "svm_linear": svm.fit,
    "knn": knn.fit,
}


def train(spec: ModelSpec, X, y, columns=None, provenance=None) -> TrainedModel:
    """Fit ``spec`` on score rows ``X`` with labels ``y`` (1 = unwanted)."""
    X, y = check_xy(X, y)
    if columns is None:
        columns = tuple(f"x{j}" for j in range(X.shape[1]))
    columns = tuple(str(c) for c in columns)
    if len(columns) != X.shape[1]:
        raise SchemaError(f"{len(columns)} column ids for {X.shape[1]} columns")
    mean = scale = None
    if spec.standardize:
        mean, scale = fit_standardizer(X)
        X = (X - mean) / scale
    state = _FIT[spec.family](X, y, spec.hyperparameters, spec.seed)
    return TrainedModel(spec, state, columns, mean, scale, dict(provenance or {}))


def _prepare(m: TrainedModel, X, columns=None) -> np.ndarray:
    if columns is not None and tuple(str(c) for c in columns) != m.columns:
        raise SchemaError(f"column schema {tuple(columns)} does not match model schema {m.columns}")
    X = np.atleast_2d(check_xy(np.atleast_2d(np.asarray(X, dtype=np.float64))))
    if X.shape[1] != len(m.columns):
        raise SchemaError(f"expected {len(m.columns)} columns, got {X.shape[1]}")
    return m.transform(X)


def predict_scores(m: TrainedModel, X, columns=None) -> np.ndarray:
    """Probability-like scores for class ``unwanted``, one per row."""
    Z = _prepare(m, X, columns)
    fam = m.family
    if fam == "naive_bayes":
        return naive_bayes.score(m.state, Z)
    if fam == "random_forest":
        return trees.score_forest(m.state, Z)
    if fam == "neural_net":
        return neural.score(m.state, Z)
    if fam == "c50_boosted_tree":
        return trees.score_boosted(m.state, Z)
    if fam == "svm_linear":
        return svm.score(m.state, Z)
    if fam == "knn":
        return knn.score(m.state, Z, m.spec.hyperparameters["k"])
    raise LearnerError(f"unknown family {fam!r}")


def predict_score(m: TrainedModel, row, columns=None) -> float:
    return float(predict_scores(m, np.asarray(row, dtype=np.float64)[None, :], columns)[0])


def label_for_score(score: float) -> InteractionLabel:
    return InteractionLabel.UNWANTED if score >= DECISION_THRESHOLD else InteractionLabel.WANTED


def predict_labels(m: TrainedModel, X, columns=None) -> np.ndarray:
    """Boolean array, True = unwanted."""
    return predict_scores(m, X, columns) >= DECISION_THRESHOLD


def predict_label(m: TrainedModel, row, columns=None) -> InteractionLabel:
    hit = predict_labels(m, np.asarray(row, dtype=np.float64)[None, :], columns)[0]
    return InteractionLabel.UNWANTED if hit else InteractionLabel.WANTED


def confusion_metrics(m: TrainedModel, X, y_true, columns=None) -> ClassMetrics:
    return metrics_from_labels(y_true, predict_labels(m, X, columns))


def accuracy(m: TrainedModel, X, y_true) -> float:
    return float(np.mean(predict_labels(m, X) == as_positive(y_true)))


# -- persistence ----------------------------------------------------------

class ModelFormatError(ValueError):
    pass


def _encode(obj):
    if isinstance(obj, np.ndarray):
        return {"__ndarray__": obj.tolist(), "dtype": str(obj.dtype), "shape": list(obj.shape)}
    if isinstance(obj, dict):
        return {k: _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _decode(obj):
    if isinstance(obj, dict):
        if "__ndarray__" in obj:
            return np.array(obj["__ndarray__"], dtype=obj["dtype"]).reshape(obj["shape"])
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    return obj


def model_to_dict(m: TrainedModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "spec": m.spec.to_dict(),
        "columns": list(m.columns),
        "preprocessing": None if m.mean is None else {"mean": m.mean.tolist(), "scale": m.scale.tolist()},
        "state": _encode(m.state),
        "provenance": m.provenance,
    }


def model_from_dict(doc: dict) -> TrainedModel:
    if not isinstance(doc, dict) or doc.get("format_version") != FORMAT_VERSION:
        found = doc.get("format_version") if isinstance(doc, dict) else None
        raise ModelFormatError(f"unsupported model format version {found!r} (expected {FORMAT_VERSION})")
    try:
        s = doc["spec"]
        spec = ModelSpec(s["family"], s["hyperparameters"], s["seed"], s["standardize"])
        pre = doc["preprocessing"]
        mean = scale = None
        if pre is not None:
            mean, scale = np.array(pre["mean"], dtype=float), np.array(pre["scale"], dtype=float)
        return TrainedModel(spec, _decode(doc["state"]), tuple(doc["columns"]), mean, scale,
                            doc.get("provenance", {}))
    except (KeyError, TypeError, LearnerError) as exc:
        raise ModelFormatError(f"malformed model document: {exc}") from exc


def dumps_model(m: TrainedModel) -> str:
    return json.dumps(model_to_dict(m), sort_keys=True)


def loads_model(text: str) -> TrainedModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file is not JSON: {exc}") from exc
    return model_from_dict(doc)


__all__ = [
    "FAMILIES", "GRIDS", "DEFAULTS", "STANDARDIZE", "FORMAT_VERSION", "DECISION_THRESHOLD",
    "ModelSpec", "TrainedModel", "ClassMetrics", "LearnerError", "SchemaError", "ModelFormatError",
    "train", "predict_score", "predict_scores", "predict_label", "predict_labels", "label_for_score",
    "confusion_metrics", "metrics_from_labels", "roc_auc", "accuracy",
    "model_to_dict", "model_from_dict", "dumps_model", "loads_model",
]
