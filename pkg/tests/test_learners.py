import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fi_linkpred import kernels, learners
from fi_linkpred.graph import InteractionLabel
from fi_linkpred.learners import (
    FAMILIES,
    GRIDS,
    ClassMetrics,
    LearnerError,
    ModelFormatError,
    ModelSpec,
    SchemaError,
    confusion_metrics,
    dumps_model,
    label_for_score,
    loads_model,
    metrics_from_labels,
    predict_label,
    predict_score,
    predict_scores,
    roc_auc,
    train,
)

from oracles import auc_by_thresholds, gradcheck_error

U, W = InteractionLabel.UNWANTED, InteractionLabel.WANTED


def blobs(seed=0, n=20, d=3, gap=3.0):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(0, 1, (n, d)), rng.normal(gap, 1, (n, d))])
    y = np.array([0] * n + [1] * n)
    return X, y


FAST = {
    "random_forest": {"n_trees": 25},
    "neural_net": {"steps": 500},
    "svm_linear": {"epochs": 500},
}


def quick_spec(family, seed=3, **hp):
    return ModelSpec(family, {**FAST.get(family, {}), **hp}, seed)


# -- specs ---------------------------------------------------------------------

def test_grids_listed():
    assert [g["mtry"] for g in GRIDS["random_forest"]] == [2, 5, 8]
    assert [g["cost"] for g in GRIDS["svm_linear"]] == [0.25, 0.5, 1.0]
    assert [g["k"] for g in GRIDS["knn"]] == [5, 7, 9]
    assert [g["trials"] for g in GRIDS["c50_boosted_tree"]] == [1, 10, 20]
    nn = GRIDS["neural_net"]
    assert {g["hidden_units"] for g in nn} == {1, 3, 5}
    assert {g["weight_decay"] for g in nn} == {0.0, 1e-4, 1e-1}


@pytest.mark.parametrize("family, hp", [
    ("knn", {"k": 0}),
    ("knn", {"k": 2.5}),
    ("svm_linear", {"cost": -1}),
    ("neural_net", {"weight_decay": -0.1}),
    ("random_forest", {"mtry": 0}),
    ("random_forest", {"bootstrap": "yes"}),
    ("c50_boosted_tree", {"trials": 0}),
    ("naive_bayes", {"distribution": "multinomial"}),
    ("knn", {"depth": 3}),
    ("lasso", {}),
])
def test_invalid_hyperparameters(family, hp):
    with pytest.raises(LearnerError):
        ModelSpec(family, hp)


def test_standardize_defaults():
    assert {f for f in FAMILIES if ModelSpec(f).standardize} == {"knn", "svm_linear", "neural_net"}


@pytest.mark.parametrize("family", FAMILIES)
def test_train_input_errors(family):
    X, y = blobs()
    with pytest.raises(LearnerError, match="empty class"):
        train(quick_spec(family), X[:5], y[:5])
    bad = X.copy()
    bad[0, 0] = np.nan
    with pytest.raises(LearnerError, match="NaN"):
        train(quick_spec(family), bad, y)


# -- per-family behaviour --------------------------------------------------------

def test_nb_separated_gaussians():
    X = np.array([[-10.0], [-10.5], [-9.5], [10.0], [10.5], [9.5]])
    y = np.array([0, 0, 0, 1, 1, 1])
    m = train(ModelSpec("naive_bayes"), X, y)
    assert predict_label(m, [-10.0]) == W
    assert predict_label(m, [10.0]) == U
    assert predict_score(m, [10.0]) > 0.99


def test_nb_variance_floor():
    X = np.array([[0.0, 1.0], [0.0, 2.0], [1.0, 1.0], [1.0, 2.0]])
    y = np.array([0, 0, 1, 1])
    m = train(ModelSpec("naive_bayes"), X, y)
    assert (m.state["var"] >= 1e-9).all()
    assert np.isfinite(predict_scores(m, X)).all()
    assert m.state["prior"].tolist() == [0.5, 0.5]


def test_knn_zero_distance():
    X, y = blobs()
    m = train(ModelSpec("knn", {"k": 1}), X, y)
    for i in (0, 7, 25, 39):
        assert predict_label(m, X[i]) == (U if y[i] else W)


def test_knn_vote_fraction():
    X = np.array([[0.0], [0.1], [0.2], [0.3], [0.4], [5.0], [6.0]])
    y = np.array([1, 1, 1, 0, 0, 0, 0])
    m = train(ModelSpec("knn", {"k": 5}, standardize=False), X, y)
    assert predict_score(m, [0.2]) == pytest.approx(0.6)


def test_knn_ties_enlarge_vote():
    X = np.array([[-1.0], [1.0], [-2.0], [2.0]])
    y = np.array([1, 0, 1, 1])
    m = train(ModelSpec("knn", {"k": 1}, standardize=False), X, y)
    # both rows at distance 1 vote
    assert predict_score(m, [0.0]) == 0.5


def test_forest_unanimous_is_binary():
    X, y = blobs(gap=20)
    m = train(quick_spec("random_forest"), X, y)
    assert set(np.unique(predict_scores(m, X))) <= {0.0, 1.0}


@pytest.mark.parametrize("seed", range(5))
def test_single_plain_tree_fits_training_set(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(30, 4))
    y = (rng.random(30) < 0.5).astype(int)
    y[:2] = [0, 1]
    spec = ModelSpec("random_forest", {"n_trees": 1, "mtry": 4, "bootstrap": False}, seed)
    m = train(spec, X, y)
    assert learners.accuracy(m, X, y) == 1.0


def test_boosted_fits_blobs():
    X, y = blobs()
    m = train(ModelSpec("c50_boosted_tree", {"trials": 10}), X, y)
    assert learners.accuracy(m, X, y) >= 0.95
    assert len(m.state["trees"]) >= 1


@pytest.mark.parametrize("seed", range(5))
def test_svm_separable_2d(seed):
    rng = np.random.default_rng(seed)
    w = rng.normal(size=2)
    X = rng.uniform(-3, 3, (60, 2))
    s = X @ w
    keep = np.abs(s) > 0.3 * np.linalg.norm(w)
    X, y = X[keep], (s[keep] > 0).astype(int)
    m = train(ModelSpec("svm_linear", {"cost": 1.0}), X, y)
    assert learners.accuracy(m, X, y) == 1.0


def test_nn_learns_blobs():
    X, y = blobs()
    m = train(ModelSpec("neural_net", {"hidden_units": 3}), X, y)
    assert learners.accuracy(m, X, y) >= 0.95
    s = predict_scores(m, X)
    assert ((s > 0) & (s < 1)).all()


@pytest.mark.parametrize("family", ["knn", "svm_linear"])
@pytest.mark.parametrize("factor", [1e-3, 7.0, 1e4])
def test_standardization_invariance(family, factor):
    X, y = blobs(seed=4, gap=1.5)
    Xq, _ = blobs(seed=5, gap=1.5)
    col = 1
    Xs, Xqs = X.copy(), Xq.copy()
    Xs[:, col] *= factor
    Xqs[:, col] *= factor
    a = train(quick_spec(family), X, y)
    b = train(quick_spec(family), Xs, y)
    assert (learners.predict_labels(a, Xq) == learners.predict_labels(b, Xqs)).all()


# -- gradient check ----------------------------------------------------------------

@pytest.mark.parametrize("decay", [0.0, 1e-4, 0.1])
def test_nn_gradient_check(decay):
    rng = np.random.default_rng(11)
    for _ in range(10):
        err, loss_err = gradcheck_error(kernels.nn_loss_grad, rng, hidden=int(rng.integers(1, 6)), decay=decay)
        assert err < 1e-4
        assert loss_err < 1e-12


# -- labels and metrics ------------------------------------------------------------

def test_label_rule():
    assert label_for_score(0.9) == U
    assert label_for_score(0.1) == W
    assert label_for_score(0.5) == U


def test_confusion_examples():
    one_miss = metrics_from_labels([U, U, W, W], [U, W, W, W])
    assert (one_miss.accuracy, one_miss.sensitivity, one_miss.specificity) == (0.75, 0.5, 1.0)
    perfect = metrics_from_labels([U, U, W, W], [U, U, W, W])
    assert (perfect.accuracy, perfect.sensitivity, perfect.specificity) == (1.0, 1.0, 1.0)
    wanted = metrics_from_labels([1, 1, 0, 0], [0, 0, 0, 0])
    assert (wanted.accuracy, wanted.sensitivity, wanted.specificity) == (0.5, 0.0, 1.0)


def test_undefined_ratios():
    m = ClassMetrics(tp=0, fp=0, tn=3, fn=0)
    assert m.sensitivity is None
    assert m.to_dict()["sensitivity"] is None
    assert m.specificity == 1.0


def test_confusion_from_model():
    X, y = blobs(gap=10)
    m = train(ModelSpec("naive_bayes"), X, y)
    cm = confusion_metrics(m, X, y)
    assert cm.tp + cm.fn == 20 and cm.accuracy == 1.0


def test_auc_examples():
    assert roc_auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0
    assert roc_auc([0.3] * 4, [0, 1, 0, 1]) == 0.5
    scores, labels = (0.1, 0.4, 0.35, 0.8), (W, W, U, U)
    assert roc_auc(scores, labels) == 0.75
    assert auc_by_thresholds(scores, [False, False, True, True]) == 0.75
    with pytest.raises(ValueError):
        roc_auc([0.1, 0.2], [1, 1])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.booleans()), min_size=2, max_size=30))
def test_auc_matches_threshold_sweep(rows):
    scores = [float(s) for s, _ in rows]
    pos = [p for _, p in rows]
    if all(pos) or not any(pos):
        return
    assert roc_auc(scores, pos) == pytest.approx(auc_by_thresholds(scores, pos), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(-50, 50), st.booleans()), min_size=2, max_size=30))
def test_auc_monotone_invariance(rows):
    # a 0.1 grid keeps the transforms strictly increasing in floating point
    s = np.array([v for v, _ in rows]) / 10
    pos = [p for _, p in rows]
    if all(pos) or not any(pos):
        return
    base = roc_auc(s, pos)
    assert roc_auc(np.exp(s), pos) == base
    assert roc_auc(3 * s + 1, pos) == base


# -- determinism and persistence -------------------------------------------------------

@pytest.mark.parametrize("family", FAMILIES)
def test_deterministic(family):
    X, y = blobs(gap=1.0)
    a = train(quick_spec(family), X, y)
    b = train(quick_spec(family), X, y)
    assert dumps_model(a) == dumps_model(b)
    assert (predict_scores(a, X) == predict_scores(b, X)).all()


def test_seed_matters_for_forest():
    X, y = blobs(gap=0.5)
    a = train(quick_spec("random_forest", seed=1), X, y)
    b = train(quick_spec("random_forest", seed=2), X, y)
    assert dumps_model(a) != dumps_model(b)


@pytest.mark.parametrize("family", FAMILIES)
def test_round_trip(family):
    X, y = blobs(gap=1.0)
    m = train(quick_spec(family), X, y, columns=["a", "b", "c"], provenance={"tag": 1})
    back = loads_model(dumps_model(m))
    assert back.columns == ("a", "b", "c")
    assert back.spec == m.spec
    assert back.provenance == {"tag": 1}
    assert (predict_scores(back, X) == predict_scores(m, X)).all()


def test_format_version_gate():
    X, y = blobs()
    doc = json.loads(dumps_model(train(ModelSpec("naive_bayes"), X, y)))
    doc["format_version"] = 99
    with pytest.raises(ModelFormatError, match="99"):
        loads_model(json.dumps(doc))
    with pytest.raises(ModelFormatError):
        loads_model("not json")
    del doc["format_version"]
    with pytest.raises(ModelFormatError):
        loads_model(json.dumps(doc))


def test_schema_checks():
    X, y = blobs()
    m = train(ModelSpec("naive_bayes"), X, y, columns=["a", "b", "c"])
    with pytest.raises(SchemaError):
        predict_scores(m, X, columns=["a", "b", "z"])
    with pytest.raises(SchemaError):
        predict_scores(m, X[:, :2])
