"""Time the compiled training kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Inputs are sized like the bundled Email data (17 training rows, 8 columns)
and like one tuning run, so the numbers reflect real use. Each kernel's
outputs are also compared across backends.
"""
import argparse
import importlib
import timeit

import numpy as np

from fi_linkpred import _kernels_py as py


def inputs(seed=0, n=17, d=8, trees=500):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    y = (X[:, 0] + 0.3 * rng.normal(size=n) > 0).astype(np.int64)
    weights = np.stack([np.bincount(rng.integers(0, n, n), minlength=n) for _ in range(trees)]).astype(float)
    keys = rng.random((trees, 2 * n - 1, d))
    W1, b1 = rng.uniform(-0.7, 0.7, (d, 3)), rng.uniform(-0.7, 0.7, 3)
    w2, b2 = rng.uniform(-0.7, 0.7, 3), 0.1
    return X, y, weights, keys, (W1, b1, w2, b2)


def cases(mod, X, y, weights, keys, net):
    Xa = np.hstack([X, np.ones((len(X), 1))])
    ypm = np.where(y == 1, 1.0, -1.0)
    forest = mod.grow_forest(X, y, weights, keys, 2, -1)
    return {
        "grow_forest (500 trees)": lambda: mod.grow_forest(X, y, weights, keys, 2, -1),
        "predict_forest (500 trees)": lambda: mod.predict_forest(X, *forest[:6]),
        "svm_fit (10000 epochs)": lambda: mod.svm_fit(Xa, ypm, 0.25, 10000),
        "nn_fit (5000 steps)": lambda: mod.nn_fit(X, y.astype(float), *net, 1e-4, 0.1, 5000),
    }


def max_diff(a, b):
    if isinstance(a, tuple):
        return max(max_diff(u, v) for u, v in zip(a, b))
    return float(np.max(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    try:
        ext = importlib.import_module("fi_linkpred._kernels")
    except ImportError:
        print("compiled extension not built; only the numpy fallback is available")
        ext = None
    data = inputs()
    py_cases = cases(py, *data)
    ext_cases = cases(ext, *data) if ext else {}
    print(f"{'kernel':28} {'python (s)':>11} {'compiled (s)':>13} {'speedup':>8} {'max diff':>9}")
    for name, fn in py_cases.items():
        t_py = min(timeit.repeat(fn, number=1, repeat=args.repeat))
        if ext is None:
            print(f"{name:28} {t_py:11.4f}")
            continue
        t_ext = min(timeit.repeat(ext_cases[name], number=1, repeat=args.repeat))
        diff = max_diff(fn(), ext_cases[name]())
        print(f"{name:28} {t_py:11.4f} {t_ext:13.4f} {t_py / t_ext:7.1f}x {diff:9.1e}")


if __name__ == "__main__":
    main()
