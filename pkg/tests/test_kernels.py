import importlib

import numpy as np
import pytest

from fi_linkpred import _kernels_py as py
from fi_linkpred import kernels

try:
    compiled = importlib.import_module("fi_linkpred._kernels")
except ImportError:  # extension not built
    compiled = None

needs_ext = pytest.mark.skipif(compiled is None, reason="compiled extension not built")


def forest_inputs(seed, n=25, d=4, T=6):
    rng = np.random.default_rng(seed)
    X = np.round(rng.normal(size=(n, d)), 1)  # rounding forces threshold ties
    y = (X[:, 0] + rng.normal(0, 0.5, n) > 0).astype(np.int64)
    weights = rng.integers(0, 3, size=(T, n)).astype(float)
    keys = rng.random((T, 2 * n - 1, d))
    return X, y, weights, keys


def test_backend_flag():
    assert kernels.BACKEND in ("compiled", "python")
    if compiled is not None:
        assert kernels.BACKEND == "compiled" or kernels.grow_forest is py.grow_forest


@needs_ext
@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("mtry, depth", [(1, -1), (2, -1), (4, 3)])
def test_forest_parity(seed, mtry, depth):
    X, y, weights, keys = forest_inputs(seed)
    a = py.grow_forest(X, y, weights, keys, mtry, depth)
    b = compiled.grow_forest(X, y, weights, keys, mtry, depth)
    for u, v in zip(a, b):
        assert np.array_equal(np.asarray(u), np.asarray(v))
    Xq = np.random.default_rng(seed + 100).normal(size=(10, 4))
    pa = py.predict_forest(Xq, *a[:6])
    pb = compiled.predict_forest(Xq, *b[:6])
    assert np.array_equal(np.asarray(pa), np.asarray(pb))


@needs_ext
@pytest.mark.parametrize("seed", range(3))
def test_svm_parity(seed):
    rng = np.random.default_rng(seed)
    X = np.hstack([rng.normal(size=(30, 3)), np.ones((30, 1))])
    y = np.where(X[:, 0] > 0, 1.0, -1.0)
    a = np.asarray(py.svm_fit(X, y, 0.5, 2000))
    b = np.asarray(compiled.svm_fit(X, y, 0.5, 2000))
    assert np.abs(a - b).max() < 1e-10


@needs_ext
@pytest.mark.parametrize("seed", range(3))
def test_nn_parity(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(20, 4))
    y = (X[:, 1] > 0).astype(float)
    W1, b1, w2, b2 = rng.uniform(-0.7, 0.7, (4, 3)), rng.uniform(-0.7, 0.7, 3), rng.uniform(-0.7, 0.7, 3), 0.1
    la, *ga = py.nn_loss_grad(X, y, W1, b1, w2, b2, 1e-3)
    lb, *gb = compiled.nn_loss_grad(X, y, W1, b1, w2, b2, 1e-3)
    assert abs(la - lb) < 1e-12
    for u, v in zip(ga, gb):
        assert np.abs(np.asarray(u) - np.asarray(v)).max() < 1e-12
    fa = py.nn_fit(X, y, W1, b1, w2, b2, 1e-3, 0.1, 300)
    fb = compiled.nn_fit(X, y, W1, b1, w2, b2, 1e-3, 0.1, 300)
    for u, v in zip(fa, fb):
        assert np.abs(np.asarray(u) - np.asarray(v)).max() < 1e-10


def test_python_fallback_is_forced(monkeypatch):
    monkeypatch.setenv("FI_LINKPRED_PURE", "1")
    try:
        mod = importlib.reload(kernels)
        assert mod.BACKEND == "python"
        assert mod.svm_fit is py.svm_fit
    finally:
        monkeypatch.delenv("FI_LINKPRED_PURE")
        importlib.reload(kernels)


def test_forest_tie_rules():
    # two identical columns: the split must use the lower index
    X = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
    y = np.array([0, 0, 1, 1])
    keys = np.zeros((1, 7, 2))
    out = kernels.grow_forest(X, y, np.ones((1, 4)), keys, 2, -1)
    feature, threshold = np.asarray(out[1]), np.asarray(out[2])
    assert feature[0] == 0
    assert threshold[0] == 1.5
