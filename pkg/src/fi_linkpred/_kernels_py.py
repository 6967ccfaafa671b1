"""Pure numpy implementations of the training kernels.

Same signatures and semantics as the compiled ``_kernels`` extension; used
when the extension is not built or ``FI_LINKPRED_PURE=1`` is set.
"""
import numpy as np

TIE_EPS = 1e-12


def _gini(w, w1):
    # weighted Gini impurity in weight units: W * (1 - p1^2 - p0^2)
    return 2.0 * w1 * (w - w1) / w if w > 0 else 0.0


def _best_split_col(xc, y, w, w_tot, w1_tot, parent_imp):
    order = np.argsort(xc, kind="stable")
    xs = xc[order]
    ws = w[order]
    w1s = ws * y[order]
    cw = np.cumsum(ws)
    cw1 = np.cumsum(w1s)
    best_gain, best_thr = None, None
    for k in range(len(xs) - 1):
        if xs[k] == xs[k + 1]:
            continue
        wl, wl1 = cw[k], cw1[k]
        wr, wr1 = w_tot - wl, w1_tot - wl1
        gain = parent_imp - _gini(wl, wl1) - _gini(wr, wr1)
        if best_gain is None or gain > best_gain + TIE_EPS:
            best_gain, best_thr = gain, 0.5 * (xs[k] + xs[k + 1])
    return best_gain, best_thr


def _grow_tree(X, y, w, keys, mtry, max_depth):
    d = X.shape[1]
    feature, threshold, left, right, value, gain = [], [], [], [], [], []
    rows0 = np.flatnonzero(w > 0)
    queue = [(rows0, 0)]
    i = 0
    while i < len(queue):
        rows, depth = queue[i]
        wr = w[rows]
        yr = y[rows]
        w_tot = float(np.sum(wr))
        w1 = float(np.sum(wr * yr))
        w0 = float(np.sum(wr * (1 - yr)))
        value.append(w1 / w_tot if w_tot > 0 else 0.5)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        gain.append(0.0)
        if w1 > 0 and w0 > 0 and (max_depth < 0 or depth < max_depth):
            imp = _gini(w_tot, w1)
            order = np.argsort(keys[i], kind="stable")
            evaluated = 0
            best = None
            for c in order:
                xc = X[rows, c]
                if np.all(xc == xc[0]):
                    continue
                evaluated += 1
                g, thr = _best_split_col(xc, yr.astype(np.float64), wr, w_tot, w1, imp)
                if best is None or g > best[0] + TIE_EPS or (
                    g >= best[0] - TIE_EPS and (c < best[1] or (c == best[1] and thr < best[2]))
                ):
                    best = (g, int(c), thr)
                if evaluated == mtry:
                    break
            if best is not None:
                g, c, thr = best
                mask = X[rows, c] <= thr
                feature[i] = c
                threshold[i] = thr
                gain[i] = g
                left[i] = len(queue)
                queue.append((rows[mask], depth + 1))
                right[i] = len(queue)
                queue.append((rows[~mask], depth + 1))
        i += 1
    return feature, threshold, left, right, value, gain


def grow_forest(X, y, weights, keys, mtry, max_depth):
    """Grow ``len(weights)`` weighted Gini trees.

    X: (n, d) float64; y: (n,) int64 in {0, 1}; weights: (T, n) row weights
    (bootstrap counts or boosting weights); keys: (T, 2n-1, d) random keys that
    fix the column order tried at each node, in node-creation order.
    Returns flat node arrays plus per-tree offsets; child indices are local.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    cols = [[] for _ in range(6)]
    offsets = [0]
    for t in range(weights.shape[0]):
        parts = _grow_tree(X, y, np.asarray(weights[t], dtype=np.float64), keys[t], int(mtry), int(max_depth))
        for acc, part in zip(cols, parts):
            acc.extend(part)
        offsets.append(offsets[-1] + len(parts[0]))
    feature, threshold, left, right, value, gain = cols
    return (
        np.array(offsets, dtype=np.int64),
        np.array(feature, dtype=np.int64),
        np.array(threshold, dtype=np.float64),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(value, dtype=np.float64),
        np.array(gain, dtype=np.float64),
    )


def predict_forest(X, offsets, feature, threshold, left, right, value):
    """Leaf value reached by each row in each tree, shape (n_rows, T)."""
    X = np.asarray(X, dtype=np.float64)
    n, T = X.shape[0], len(offsets) - 1
    out = np.empty((n, T))
    for t in range(T):
        base = offsets[t]
        for r in range(n):
            node = 0
            while feature[base + node] >= 0:
                if X[r, feature[base + node]] <= threshold[base + node]:
                    node = left[base + node]
                else:
                    node = right[base + node]
            out[r, t] = value[base + node]
    return out


def svm_fit(X, y, C, epochs):
    """Full-batch sub-gradient descent on (lam/2)|w|^2 + mean hinge, lam = 1/(C n).

    Step size 1/(lam t). y in {-1, +1}; the caller appends a bias column.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, d = X.shape
    lam = 1.0 / (C * n)
    w = np.zeros(d)
    for t in range(1, int(epochs) + 1):
        eta = 1.0 / (lam * t)
        viol = y * (X @ w) < 1.0
        g = lam * w - (y[viol] @ X[viol]) / n
        w = w - eta * g
    return w


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def nn_loss_grad(X, y, W1, b1, w2, b2, decay):
    """Mean cross-entropy of a one-hidden-layer logistic net plus decay*|weights|^2.

    Biases are not decayed. Returns (loss, gW1, gb1, gw2, gb2).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    hid = _sigmoid(X @ W1 + b1)
    o = hid @ w2 + b2
    ce = np.maximum(o, 0.0) + np.log1p(np.exp(-np.abs(o))) - y * o
    loss = float(np.mean(ce) + decay * (np.sum(W1 * W1) + np.sum(w2 * w2)))
    do = (_sigmoid(o) - y) / n
    gw2 = hid.T @ do + 2.0 * decay * w2
    gb2 = float(np.sum(do))
    da = np.outer(do, w2) * hid * (1.0 - hid)
    gW1 = X.T @ da + 2.0 * decay * W1
    gb1 = np.sum(da, axis=0)
    return loss, gW1, gb1, gw2, gb2


def nn_fit(X, y, W1, b1, w2, b2, decay, lr, steps):
    W1 = np.array(W1, dtype=np.float64)
    b1 = np.array(b1, dtype=np.float64)
    w2 = np.array(w2, dtype=np.float64)
    b2 = float(b2)
    for _ in range(int(steps)):
        _, gW1, gb1, gw2, gb2 = nn_loss_grad(X, y, W1, b1, w2, b2, decay)
        W1 -= lr * gW1
        b1 -= lr * gb1
        w2 -= lr * gw2
        b2 -= lr * gb2
    return W1, b1, w2, b2
