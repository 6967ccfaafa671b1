"""k-nearest neighbours on standardized rows, Euclidean distance."""
import numpy as np

DIST_EPS = 1e-12


def fit(X, y, hp, seed):
    return {"X": X.copy(), "y": y.astype(np.int64).copy()}


def score(state, X, k):
    Xt, yt = state["X"], state["y"]
    k = min(int(k), len(Xt))
    out = np.empty(X.shape[0])
    for i, row in enumerate(X):
        dist = np.sqrt(((Xt - row) ** 2).sum(axis=1))
        kth = np.sort(dist)[k - 1]
        # every row tied with the k-th neighbour votes
        near = dist <= kth + DIST_EPS
        out[i] = yt[near].mean()
    return out
