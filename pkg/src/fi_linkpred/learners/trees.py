"""Gini decision trees: bagged random forest and adaptively boosted trees.

Trees are stored as flat node arrays (see ``kernels.grow_forest``); a node
with ``feature == -1`` is a leaf whose ``value`` is the weighted fraction of
unwanted rows that reached it.
"""
import numpy as np

from .. import kernels

_NODE_KEYS = ("offsets", "feature", "threshold", "left", "right", "value", "gain")


def _tree_seed(seed, t):
    return np.random.SeedSequence(int(seed), spawn_key=(t,))


def fit_forest(X, y, hp, seed):
    n, d = X.shape
    T = int(hp["n_trees"])
    mtry = min(int(hp["mtry"]), d)
    weights = np.empty((T, n))
    keys = np.empty((T, 2 * n - 1, d))
    for t in range(T):
        rng = np.random.default_rng(_tree_seed(seed, t))
        draw = rng.integers(0, n, size=n)
        # without bootstrap every row enters once, which gives plain trees
        weights[t] = np.bincount(draw, minlength=n) if hp["bootstrap"] else 1.0
        keys[t] = rng.random((2 * n - 1, d))
    arrays = kernels.grow_forest(X, y, weights, keys, mtry, int(hp["max_depth"]))
    return dict(zip(_NODE_KEYS, arrays))


def leaf_values(state, X):
    return kernels.predict_forest(X, *(state[k] for k in _NODE_KEYS[:6]))


def score_forest(state, X):
    votes = leaf_values(state, X) >= 0.5
    return votes.mean(axis=1)


def impurity_importance(state, d):
    """Total Gini decrease per column over all trees, scaled so the maximum is 100."""
    imp = np.zeros(d)
    split = state["feature"] >= 0
    np.add.at(imp, state["feature"][split], state["gain"][split])
    top = imp.max()
    return imp / top * 100.0 if top > 0 else imp


ERR_FLOOR = 1e-10


def fit_boosted(X, y, hp, seed):
    """Discrete AdaBoost over depth-limited Gini trees for ``trials`` rounds."""
    n, d = X.shape
    keys = np.zeros((1, 2 * n - 1, d))  # all columns, in index order
    w = np.full(n, 1.0 / n)
    trees, alphas = [], []
    for _ in range(int(hp["trials"])):
        arrays = kernels.grow_forest(X, y, (w * n)[None, :], keys, d, int(hp["max_depth"]))
        tree = dict(zip(_NODE_KEYS, arrays))
        pred = (leaf_values(tree, X)[:, 0] >= 0.5).astype(np.int64)
        miss = pred != y
        err = float(w[miss].sum() / w.sum())
        if err >= 0.5:
            if not trees:
                trees.append(tree)
                alphas.append(1.0)
            break
        err = max(err, ERR_FLOOR)
        alpha = 0.5 * np.log((1.0 - err) / err)
        trees.append(tree)
        alphas.append(alpha)
        if err <= ERR_FLOOR:
            break
        w = w * np.exp(np.where(miss, alpha, -alpha))
        w = w / w.sum()
    return {"trees": trees, "alpha": np.array(alphas)}


def score_boosted(state, X):
    votes = np.column_stack([leaf_values(t, X)[:, 0] >= 0.5 for t in state["trees"]])
    alpha = state["alpha"]
    return votes @ alpha / alpha.sum()


def usage_importance(state, X, d):
    """Share of training rows routed through a split on each column, alpha-weighted over rounds."""
    imp = np.zeros(d)
    for tree, alpha in zip(state["trees"], state["alpha"]):
        used = np.zeros((X.shape[0], d), dtype=bool)
        feat, thr, left, right = tree["feature"], tree["threshold"], tree["left"], tree["right"]
        for r, row in enumerate(X):
            node = 0
            while feat[node] >= 0:
                used[r, feat[node]] = True
                node = left[node] if row[feat[node]] <= thr[node] else right[node]
        imp += alpha * used.mean(axis=0)
    top = imp.max()
    return imp / top * 100.0 if top > 0 else imp
