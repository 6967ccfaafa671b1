# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled training kernels. Semantics match ``_kernels_py`` exactly."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log1p, fabs, tanh

cnp.import_array()

cdef double TIE_EPS = 1e-12


cdef inline double _gini(double w, double w1) nogil:
    if w > 0:
        return 2.0 * w1 * (w - w1) / w
    return 0.0


cdef void _argsort_stable(const double[:] keys, Py_ssize_t[:] out, Py_ssize_t m) nogil:
    cdef Py_ssize_t i, j, v
    for i in range(m):
        out[i] = i
    for i in range(1, m):
        v = out[i]
        j = i - 1
        while j >= 0 and keys[out[j]] > keys[v]:
            out[j + 1] = out[j]
            j -= 1
        out[j + 1] = v


cdef void _sort_rows_by(const double[:, :] X, Py_ssize_t c, Py_ssize_t[:] rows, Py_ssize_t m) nogil:
    # stable insertion sort of rows[0:m] by X[row, c]
    cdef Py_ssize_t i, j, v
    for i in range(1, m):
        v = rows[i]
        j = i - 1
        while j >= 0 and X[rows[j], c] > X[v, c]:
            rows[j + 1] = rows[j]
            j -= 1
        rows[j + 1] = v


def grow_forest(X, y, weights, keys, int mtry, int max_depth):
    cdef const double[:, :] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const long long[:] yv = np.ascontiguousarray(y, dtype=np.int64)
    cdef const double[:, :] Wv = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const double[:, :, :] Kv = np.ascontiguousarray(keys, dtype=np.float64)
    cdef Py_ssize_t n = Xv.shape[0], d = Xv.shape[1], T = Wv.shape[0]
    cdef Py_ssize_t M = Kv.shape[1]
    cdef Py_ssize_t cap = T * M if T * M > 0 else 1

    f_arr = np.full(cap, -1, dtype=np.int64)
    t_arr = np.zeros(cap, dtype=np.float64)
    l_arr = np.full(cap, -1, dtype=np.int64)
    r_arr = np.full(cap, -1, dtype=np.int64)
    v_arr = np.zeros(cap, dtype=np.float64)
    g_arr = np.zeros(cap, dtype=np.float64)
    off_arr = np.zeros(T + 1, dtype=np.int64)
    cdef long long[:] feat = f_arr
    cdef double[:] thr = t_arr
    cdef long long[:] lft = l_arr
    cdef long long[:] rgt = r_arr
    cdef double[:] val = v_arr
    cdef double[:] gn = g_arr
    cdef long long[:] off = off_arr

    rows_a = np.zeros(max(n, 1), dtype=np.intp)
    tmp_a = np.zeros(max(n, 1), dtype=np.intp)
    srt_a = np.zeros(max(n, 1), dtype=np.intp)
    corder_a = np.zeros(max(d, 1), dtype=np.intp)
    nstart_a = np.zeros(max(M, 1), dtype=np.intp)
    nend_a = np.zeros(max(M, 1), dtype=np.intp)
    ndepth_a = np.zeros(max(M, 1), dtype=np.intp)
    cdef Py_ssize_t[:] rows = rows_a
    cdef Py_ssize_t[:] tmp = tmp_a
    cdef Py_ssize_t[:] srt = srt_a
    cdef Py_ssize_t[:] corder = corder_a
    cdef Py_ssize_t[:] nstart = nstart_a
    cdef Py_ssize_t[:] nend = nend_a
    cdef Py_ssize_t[:] ndepth = ndepth_a

    cdef Py_ssize_t t, i, k, r, cc, c, m, cnt, evaluated, base = 0, pos, nl
    cdef double w_tot, w1, w0, wr, imp, cw, cw1, g, best_g, best_thr, thr_k, xr, xc0
    cdef Py_ssize_t best_c
    cdef bint have_best, constant

    with nogil:
        for t in range(T):
            off[t] = base
            m = 0
            for r in range(n):
                if Wv[t, r] > 0:
                    rows[m] = r
                    m += 1
            nstart[0] = 0
            nend[0] = m
            ndepth[0] = 0
            cnt = 1
            i = 0
            while i < cnt:
                w_tot = 0.0
                w1 = 0.0
                w0 = 0.0
                for k in range(nstart[i], nend[i]):
                    r = rows[k]
                    wr = Wv[t, r]
                    w_tot += wr
                    w1 += wr * yv[r]
                    w0 += wr * (1 - yv[r])
                val[base + i] = w1 / w_tot if w_tot > 0 else 0.5
                if w1 > 0 and w0 > 0 and (max_depth < 0 or ndepth[i] < max_depth):
                    imp = _gini(w_tot, w1)
                    _argsort_stable(Kv[t, i, :], corder, d)
                    evaluated = 0
                    have_best = False
                    best_g = 0.0
                    best_c = -1
                    best_thr = 0.0
                    m = nend[i] - nstart[i]
                    for cc in range(d):
                        c = corder[cc]
                        xc0 = Xv[rows[nstart[i]], c]
                        constant = True
                        for k in range(nstart[i], nend[i]):
                            if Xv[rows[k], c] != xc0:
                                constant = False
                                break
                        if constant:
                            continue
                        evaluated += 1
                        for k in range(m):
                            srt[k] = rows[nstart[i] + k]
                        _sort_rows_by(Xv, c, srt, m)
                        cw = 0.0
                        cw1 = 0.0
                        for k in range(m - 1):
                            r = srt[k]
                            cw = cw + Wv[t, r]
                            cw1 = cw1 + Wv[t, r] * yv[r]
                            if Xv[r, c] == Xv[srt[k + 1], c]:
                                continue
                            g = imp - _gini(cw, cw1) - _gini(w_tot - cw, w1 - cw1)
                            thr_k = 0.5 * (Xv[r, c] + Xv[srt[k + 1], c])
                            if (not have_best) or g > best_g + TIE_EPS or (
                                g >= best_g - TIE_EPS and (c < best_c or (c == best_c and thr_k < best_thr))):
                                have_best = True
                                best_g = g
                                best_c = c
                                best_thr = thr_k
                        if evaluated == mtry:
                            break
                    if have_best:
                        feat[base + i] = best_c
                        thr[base + i] = best_thr
                        gn[base + i] = best_g
                        # stable partition of rows[nstart:nend]
                        pos = 0
                        for k in range(nstart[i], nend[i]):
                            if Xv[rows[k], best_c] <= best_thr:
                                tmp[pos] = rows[k]
                                pos += 1
                        nl = pos
                        for k in range(nstart[i], nend[i]):
                            if not (Xv[rows[k], best_c] <= best_thr):
                                tmp[pos] = rows[k]
                                pos += 1
                        for k in range(pos):
                            rows[nstart[i] + k] = tmp[k]
                        lft[base + i] = cnt
                        nstart[cnt] = nstart[i]
                        nend[cnt] = nstart[i] + nl
                        ndepth[cnt] = ndepth[i] + 1
                        cnt += 1
                        rgt[base + i] = cnt
                        nstart[cnt] = nstart[i] + nl
                        nend[cnt] = nend[i]
                        ndepth[cnt] = ndepth[i] + 1
                        cnt += 1
                i += 1
            base += cnt
        off[T] = base
    return (off_arr, f_arr[:base].copy(), t_arr[:base].copy(), l_arr[:base].copy(),
            r_arr[:base].copy(), v_arr[:base].copy(), g_arr[:base].copy())


def predict_forest(X, offsets, feature, threshold, left, right, value):
    cdef const double[:, :] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const long long[:] off = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef const long long[:] feat = np.ascontiguousarray(feature, dtype=np.int64)
    cdef const double[:] thr = np.ascontiguousarray(threshold, dtype=np.float64)
    cdef const long long[:] lft = np.ascontiguousarray(left, dtype=np.int64)
    cdef const long long[:] rgt = np.ascontiguousarray(right, dtype=np.int64)
    cdef const double[:] val = np.ascontiguousarray(value, dtype=np.float64)
    cdef Py_ssize_t n = Xv.shape[0], T = off.shape[0] - 1, t, r
    cdef long long node, b
    out_a = np.empty((n, T), dtype=np.float64)
    cdef double[:, :] out = out_a
    with nogil:
        for t in range(T):
            b = off[t]
            for r in range(n):
                node = 0
                while feat[b + node] >= 0:
                    if Xv[r, feat[b + node]] <= thr[b + node]:
                        node = lft[b + node]
                    else:
                        node = rgt[b + node]
                out[r, t] = val[b + node]
    return out_a


def svm_fit(X, y, double C, long epochs):
    cdef const double[:, :] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const double[:] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = Xv.shape[0], d = Xv.shape[1], i, j
    cdef double lam = 1.0 / (C * n), eta, mrg
    w_a = np.zeros(d, dtype=np.float64)
    s_a = np.zeros(d, dtype=np.float64)
    cdef double[:] w = w_a
    cdef double[:] s = s_a
    cdef long t
    with nogil:
        for t in range(1, epochs + 1):
            eta = 1.0 / (lam * t)
            for j in range(d):
                s[j] = 0.0
            for i in range(n):
                mrg = 0.0
                for j in range(d):
                    mrg = mrg + Xv[i, j] * w[j]
                if yv[i] * mrg < 1.0:
                    for j in range(d):
                        s[j] = s[j] + yv[i] * Xv[i, j]
            for j in range(d):
                w[j] = w[j] - eta * (lam * w[j] - s[j] / n)
    return w_a


cdef inline double _sigmoid(double z) nogil:
    return 0.5 * (1.0 + tanh(0.5 * z))


cdef double _nn_pass(const double[:, :] X, const double[:] y, double[:, :] W1, double[:] b1,
                     double[:] w2, double b2, double decay,
                     double[:, :] gW1, double[:] gb1, double[:] gw2, double* gb2,
                     double[:] hid) nogil:
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], h = W1.shape[1], i, j, u
    cdef double a, o, ce = 0.0, do, reg = 0.0, da
    for j in range(d):
        for u in range(h):
            gW1[j, u] = 0.0
    for u in range(h):
        gb1[u] = 0.0
        gw2[u] = 0.0
    gb2[0] = 0.0
    for i in range(n):
        o = b2
        for u in range(h):
            a = b1[u]
            for j in range(d):
                a = a + X[i, j] * W1[j, u]
            hid[u] = _sigmoid(a)
            o = o + hid[u] * w2[u]
        ce = ce + (o if o > 0 else 0.0) + log1p(exp(-fabs(o))) - y[i] * o
        do = (_sigmoid(o) - y[i]) / n
        gb2[0] = gb2[0] + do
        for u in range(h):
            gw2[u] = gw2[u] + hid[u] * do
            da = do * w2[u] * hid[u] * (1.0 - hid[u])
            gb1[u] = gb1[u] + da
            for j in range(d):
                gW1[j, u] = gW1[j, u] + X[i, j] * da
    for j in range(d):
        for u in range(h):
            reg = reg + W1[j, u] * W1[j, u]
            gW1[j, u] = gW1[j, u] + 2.0 * decay * W1[j, u]
    for u in range(h):
        reg = reg + w2[u] * w2[u]
        gw2[u] = gw2[u] + 2.0 * decay * w2[u]
    return ce / n + decay * reg


def nn_loss_grad(X, y, W1, b1, w2, b2, double decay):
    cdef const double[:, :] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const double[:] yv = np.ascontiguousarray(y, dtype=np.float64)
    W1a = np.array(W1, dtype=np.float64)
    b1a = np.array(b1, dtype=np.float64)
    w2a = np.array(w2, dtype=np.float64)
    gW1 = np.zeros_like(W1a)
    gb1 = np.zeros_like(b1a)
    gw2 = np.zeros_like(w2a)
    hid = np.zeros_like(b1a)
    cdef double gb2 = 0.0
    cdef double loss = _nn_pass(Xv, yv, W1a, b1a, w2a, float(b2), decay, gW1, gb1, gw2, &gb2, hid)
    return loss, gW1, gb1, gw2, gb2


def nn_fit(X, y, W1, b1, w2, b2, double decay, double lr, long steps):
    cdef const double[:, :] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const double[:] yv = np.ascontiguousarray(y, dtype=np.float64)
    W1a = np.array(W1, dtype=np.float64)
    b1a = np.array(b1, dtype=np.float64)
    w2a = np.array(w2, dtype=np.float64)
    cdef double[:, :] W1v = W1a
    cdef double[:] b1v = b1a
    cdef double[:] w2v = w2a
    gW1a = np.zeros_like(W1a)
    gb1a = np.zeros_like(b1a)
    gw2a = np.zeros_like(w2a)
    hida = np.zeros_like(b1a)
    cdef double[:, :] gW1 = gW1a
    cdef double[:] gb1 = gb1a
    cdef double[:] gw2 = gw2a
    cdef double[:] hid = hida
    cdef double b2v = float(b2), gb2 = 0.0
    cdef Py_ssize_t d = W1a.shape[0], h = W1a.shape[1], j, u
    cdef long s
    with nogil:
        for s in range(steps):
            _nn_pass(Xv, yv, W1v, b1v, w2v, b2v, decay, gW1, gb1, gw2, &gb2, hid)
            for j in range(d):
                for u in range(h):
                    W1v[j, u] = W1v[j, u] - lr * gW1[j, u]
            for u in range(h):
                b1v[u] = b1v[u] - lr * gb1[u]
                w2v[u] = w2v[u] - lr * gw2[u]
            b2v = b2v - lr * gb2
    return W1a, b1a, w2a, b2v
