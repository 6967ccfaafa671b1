import json

import numpy as np
import pytest

from fi_linkpred import evaluation, learners
from fi_linkpred.dataset import build_dataset, stratified_kfold, FoldPlan
from fi_linkpred.evaluation import (
    Infeasible,
    PipelineConfig,
    PipelineError,
    auc_filter_importance,
    classify_candidates,
    cross_validate,
    loo_detection,
    model_importance,
    run_pipeline,
    tune,
)
from fi_linkpred.graph import FeatureGraph, InteractionLabel
from fi_linkpred.learners import ModelSpec, train
from fi_linkpred.report import render_markdown
from fi_linkpred.similarity import LOCAL_METRICS, METRICS, MetricId, MetricParams, metric_matrices, score_table

from conftest import path

U = InteractionLabel.UNWANTED


class _Majority:
    def __init__(self, y):
        self.label = bool(np.mean(y) > 0.5)


def test_majority_class_loo(monkeypatch):
    monkeypatch.setattr(learners, "train", lambda spec, X, y, columns=None: _Majority(y))
    monkeypatch.setattr(learners, "accuracy", lambda m, X, y: float(np.mean(np.asarray(y, bool) == m.label)))
    y = np.array([1] * 10 + [0] * 11)
    X = np.zeros((21, 1))
    acc = cross_validate(ModelSpec("naive_bayes"), X, y, stratified_kfold(y, 21, 0))
    assert acc == pytest.approx(11 / 21)


def test_memorizer_on_two_folds():
    X = np.array([[0.0], [0.1], [0.2], [0.3], [5.0], [5.1], [5.2], [5.3]])
    y = np.array([0, 0, 0, 0, 1, 1, 1, 1])
    plan = stratified_kfold(y, 2, 1)
    spec = ModelSpec("knn", {"k": 1})
    assert cross_validate(spec, X, y, plan) == 1.0
    assert cross_validate(spec, X, y, plan) == cross_validate(spec, X, y, plan)


def test_cv_skips_empty_folds():
    X = np.array([[0.0], [1.0], [5.0], [6.0]])
    y = np.array([0, 0, 1, 1])
    plan = FoldPlan(3, [0, 1, 0, 1], 0)
    assert cross_validate(ModelSpec("knn", {"k": 1}), X, y, plan) == 1.0


def test_tune_prefers_first_of_ties():
    X = np.array([[0.0], [0.1], [0.2], [5.0], [5.1], [5.2]])
    y = np.array([0, 0, 0, 1, 1, 1])
    plan = stratified_kfold(y, 3, 0)
    res = tune("knn", [{"k": 1}, {"k": 3}], X, y, plan)
    assert [p["cv_accuracy"] for p in res.grid] == [1.0, 1.0]
    assert res.best_spec.hyperparameters["k"] == 1
    assert res.best_cv_accuracy == max(p["cv_accuracy"] for p in res.grid)
    single = tune("svm_linear", [{"cost": 0.5}], X, y, plan)
    assert single.best_spec.hyperparameters["cost"] == 0.5


def test_tune_all_infeasible():
    X = np.arange(4.0)[:, None]
    y = np.array([1, 0, 0, 0])
    plan = FoldPlan(2, [0, 1, 1, 0], 0)
    with pytest.raises(Infeasible):
        tune("naive_bayes", [{}], X, y, plan)
    with pytest.raises(ValueError):
        tune("naive_bayes", [], X, y, plan)


def test_tune_marks_infeasible_points(monkeypatch):
    X = np.arange(6.0)[:, None]
    y = np.array([0, 0, 0, 1, 1, 1])
    plan = stratified_kfold(y, 3, 0)
    real = evaluation.cross_validate

    def flaky(spec, *a, **kw):
        if spec.hyperparameters["k"] == 1:
            raise Infeasible("test")
        return real(spec, *a, **kw)

    monkeypatch.setattr(evaluation, "cross_validate", flaky)
    res = tune("knn", [{"k": 1}, {"k": 3}], X, y, plan)
    assert res.grid[0]["cv_accuracy"] is None
    assert res.best_spec.hyperparameters["k"] == 3


# -- importance --------------------------------------------------------------

def test_auc_filter_examples():
    y = np.array([0, 1, 0, 1, 1])
    X = np.column_stack([y, np.full(5, 2.0), 1 - y])
    rk = auc_filter_importance(X, y, ["label", "const", "flip"])
    assert rk.scores == {"label": 1.0, "const": 0.5, "flip": 1.0}
    assert rk.ranking == ["flip", "label", "const"]


def test_auc_filter_monotone_invariance():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(30, 3))
    y = (rng.random(30) < 0.5).astype(int)
    a = auc_filter_importance(X, y, "abc")
    b = auc_filter_importance(np.column_stack([np.exp(X[:, 0]), X[:, 1] ** 3, 2 * X[:, 2] - 1]), y, "abc")
    assert a.scores == b.scores


def test_auc_filter_email(email):
    ds = build_dataset(score_table(email), email)
    top3 = auc_filter_importance(ds.X, ds.y, ds.columns).ranking[:3]
    assert {"katz", "rwr"} <= set(top3)


def test_forest_importance_single_column():
    rng = np.random.default_rng(1)
    X = np.column_stack([np.ones(20), rng.normal(size=20), np.zeros(20)])
    y = (X[:, 1] > 0).astype(int)
    m = train(ModelSpec("random_forest", {"mtry": 3, "n_trees": 20}), X, y, columns=["a", "b", "c"])
    assert model_importance(m).scores == {"a": 0.0, "b": 100.0, "c": 0.0}


def test_network_importance_zero_column():
    X = np.random.default_rng(2).normal(size=(20, 3))
    y = (X[:, 0] > 0).astype(int)
    m = train(ModelSpec("neural_net", {"hidden_units": 3, "steps": 50}), X, y, columns=["a", "b", "c"])
    m.state["W1"][2, :] = 0.0
    rk = model_importance(m)
    assert rk.method == "network_weights"
    assert rk.scores["c"] == 0.0 and max(rk.scores.values()) == 100.0


def test_boosted_importance_needs_rows():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(20, 2))
    y = (X[:, 1] > 0).astype(int)
    m = train(ModelSpec("c50_boosted_tree", {"trials": 3}), X, y, columns=["a", "b"])
    rk = model_importance(m, X)
    assert rk.method == "tree_usage" and rk.ranking[0] == "b"
    with pytest.raises(ValueError):
        model_importance(m)
    with pytest.raises(ValueError, match="auc_filter"):
        model_importance(train(ModelSpec("knn"), X, y))


# -- leave-one-out detection -------------------------------------------------------

def test_loo_two_edge_path():
    res = loo_detection(path("a", "b", "c"))
    first, second = res.per_edge
    # holding out a-b leaves b-c; candidates a-b and a-c tie on every metric
    assert first["edge"] == ["a", "b"] and first["n_candidates"] == 2
    assert set(first["rank"].values()) == {1}
    assert set(first["auc"].values()) == {0.5}
    # holding out b-c leaves a-b; candidates a-c and b-c tie, a-c sorts first
    assert set(second["rank"].values()) == {2}
    assert set(second["optimistic_rank"].values()) == {1}
    assert res.detections == {m.value: 1 for m in METRICS}


def test_loo_shared_neighbors_detected_by_jaccard():
    # x and y share p, q, r; each of those has one private leaf so no other pair overlaps fully
    edges = [("x", "y")] + [(a, b) for a in "xy" for b in "pqr"] + [("p", "s"), ("q", "t"), ("r", "u")]
    g = FeatureGraph.from_edges("xypqrstu", edges)
    row = next(r for r in loo_detection(g, metric_set=["jaccard"]).per_edge if r["edge"] == ["x", "y"])
    assert row["rank"]["jaccard"] == 1


def test_loo_requires_two_edges():
    with pytest.raises(ValueError):
        loo_detection(path("a", "b"))


def test_loo_never_sees_held_out_edge(monkeypatch, email):
    seen = []
    real = evaluation.metric_matrices

    def spy(g, params):
        seen.append(g)
        return real(g, params)

    monkeypatch.setattr(evaluation, "metric_matrices", spy)
    res = loo_detection(email)
    assert len(seen) == 10
    for g, row in zip(seen, res.per_edge):
        assert tuple(row["edge"]) not in g.edges
        assert len(g.edges) == 9


def test_loo_invariants(email):
    res = loo_detection(email)
    for row in res.per_edge:
        g = email.without_edge(*row["edge"])
        mats = metric_matrices(g)
        idx = g.index()
        a, b = row["edge"]
        for m in METRICS:
            assert 1 <= row["optimistic_rank"][m.value] <= row["rank"][m.value] <= row["n_candidates"]
            assert 0 <= row["auc"][m.value] <= 1
            # rank recomputed independently from the reduced graph
            target = round(mats[m][idx[a], idx[b]], 9)
            greater = sum(round(mats[m][idx[p], idx[q]], 9) > target
                          for p, q in [(p, q) for p in g.features for q in g.features if p < q]
                          if (p, q) not in g.edges)
            assert row["optimistic_rank"][m.value] == greater + 1
    for m, count in res.detections.items():
        assert 0 <= count <= 10
        assert count == sum(r["rank"][m] == 1 for r in res.per_edge)


# -- candidate classification --------------------------------------------------------

@pytest.fixture(scope="module")
def email_nb(email):
    ds = build_dataset(score_table(email), email)
    m = train(ModelSpec("naive_bayes"), ds.X, ds.y, ds.column_ids)
    return ds, m


def test_known_edges_classified_unwanted(email, email_nb):
    ds, m = email_nb
    assert learners.accuracy(m, ds.X, ds.y) == 1.0
    out = classify_candidates(email, m, MetricParams(), [("Forward", "Encrypt"), ("Sign", "Verify")])
    assert [(p, lab) for p, lab, _ in out] == [(("Encrypt", "Forward"), U), (("Sign", "Verify"), U)]


def test_new_isolated_feature(email, email_nb):
    _, m = email_nb
    g = FeatureGraph(email.features + ("Spam",), email.edges)
    (pair, label, score), = classify_candidates(g, m, MetricParams(), [("Spam", "Encrypt")])
    assert 0.0 <= score <= 1.0
    row = metric_matrices(g)
    i, j = g.index()["Spam"], g.index()["Encrypt"]
    assert all(row[mid][i, j] == 0 for mid in LOCAL_METRICS)


def test_candidate_errors(email, email_nb):
    _, m = email_nb
    with pytest.raises(ValueError, match="Nope"):
        classify_candidates(email, m, MetricParams(), [("Nope", "Encrypt")])
    other = train(ModelSpec("naive_bayes"), np.eye(2), [0, 1])
    with pytest.raises(learners.SchemaError):
        classify_candidates(email, other, MetricParams(), [("Sign", "Encrypt")])
    assert classify_candidates(email, m, MetricParams(), []) == []


def test_fire_flood_pipes():
    # Fire and Flood both drive the water valve off the sensor; Pipes copies Flood's wiring
    # except for the Fire interaction, which is the pair being predicted
    edges = [("Fire", "Flood"), ("Fire", "Sensor"), ("Fire", "Valve"), ("Flood", "Sensor"), ("Flood", "Valve"),
             ("Alarm", "Sensor"), ("Pipes", "Sensor"), ("Pipes", "Valve")]
    g = FeatureGraph.from_edges(["Alarm", "Fire", "Flood", "Pipes", "Sensor", "Valve"], edges)
    mats = metric_matrices(g)
    idx = g.index()
    wanted = [(a, b) for a in g.features for b in g.features
              if a < b and (a, b) not in g.edges and {a, b} != {"Fire", "Pipes"}]
    for m in LOCAL_METRICS:
        target = mats[m][idx["Fire"], idx["Pipes"]]
        med = np.median([mats[m][idx[a], idx[b]] for a, b in wanted])
        assert target >= med, m


# -- pipeline ------------------------------------------------------------------

FAST_CFG = PipelineConfig(families=("naive_bayes", "knn", "svm_linear"))


def test_pipeline_report_shape(email):
    rep = run_pipeline(email, seed=42)
    d = rep.to_dict()
    assert len(d["tuning"]) == 6 and len(d["test_metrics"]) == 6
    assert len(d["importance"]) == 7 and "dataset" in d["importance"]
    assert len(d["loo"]["per_edge"]) == 10
    assert d["dataset"]["rows"] == 21
    assert len(d["split"]["test_indices"]) == 4
    md = render_markdown(d)
    assert "## Leave-one-out detection" in md and "local_path" in md


def test_pipeline_deterministic(email):
    a = run_pipeline(email, seed=7, config=FAST_CFG).to_json()
    b = run_pipeline(email, seed=7, config=FAST_CFG).to_json()
    assert a == b
    assert json.loads(a)["seed"] == 7


def test_family_order_invariance(email):
    fwd = run_pipeline(email, seed=3, config=FAST_CFG).to_json()
    rev = PipelineConfig(families=tuple(reversed(FAST_CFG.families)))
    assert run_pipeline(email, seed=3, config=rev).to_json() == fwd


def test_pipeline_zero_edges():
    with pytest.raises(PipelineError) as err:
        run_pipeline(FeatureGraph(("a", "b", "c")))
    assert err.value.stage == "dataset"
    assert "single-class dataset" in str(err.value)


def test_pipeline_config_validation():
    with pytest.raises(ValueError):
        PipelineConfig(k_folds=1)
    with pytest.raises(ValueError):
        PipelineConfig(families=("boosted_svm",))
    with pytest.raises(ValueError):
        PipelineConfig(loo_metrics=("pagerank",))


def test_loo_metric_subset(email):
    rep = run_pipeline(email, seed=1, config=PipelineConfig(families=("naive_bayes",), loo_metrics=("katz", "rwr")))
    assert rep.loo["metrics"] == ["katz", "rwr"]
    assert set(rep.loo["detections"]) == {"katz", "rwr"}
