"""One-hidden-layer logistic network with L2 weight decay."""
import numpy as np

from .. import kernels


def init_params(d, hidden, init_range, seed):
    rng = np.random.default_rng(seed)
    W1 = rng.uniform(-init_range, init_range, size=(d, hidden))
    b1 = rng.uniform(-init_range, init_range, size=hidden)
    w2 = rng.uniform(-init_range, init_range, size=hidden)
    b2 = float(rng.uniform(-init_range, init_range))
    return W1, b1, w2, b2


def fit(X, y, hp, seed):
    W1, b1, w2, b2 = init_params(X.shape[1], int(hp["hidden_units"]), float(hp["init_range"]), seed)
    W1, b1, w2, b2 = kernels.nn_fit(X, y.astype(np.float64), W1, b1, w2, b2,
                                    float(hp["weight_decay"]), float(hp["learning_rate"]), int(hp["steps"]))
    return {"W1": np.asarray(W1), "b1": np.asarray(b1), "w2": np.asarray(w2), "b2": float(b2)}


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def score(state, X):
    hid = _sigmoid(X @ state["W1"] + state["b1"])
    return _sigmoid(hid @ state["w2"] + state["b2"])


def garson(state):
    """Input-to-output weight attribution, normalized to a maximum of 100."""
    W1 = np.abs(state["W1"])
    w2 = np.abs(state["w2"])
    col = W1.sum(axis=0)
    share = np.divide(W1, col, out=np.zeros_like(W1), where=col > 0)
    imp = share @ w2
    top = imp.max()
    return imp / top * 100.0 if top > 0 else imp
