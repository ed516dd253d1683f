"""Timing comparison of the compiled and pure-NumPy kernel backends.

Usage: python benchmarks/bench_backends.py [--batch 128] [--repeats 200]

Times the three hot kernels (forward, backward, Adam) at training shape
and a short end-to-end training run per backend, checking along the way
that both backends agree numerically.
"""

import argparse
import time

import numpy as np

from debiaskit import backends
from debiaskit.backends import python as py_backend
from debiaskit.data import Dataset
from debiaskit.nn import TrainConfig, init_params, train_baseline

try:
    from debiaskit.backends import _kernels as cy_backend
except ImportError:
    cy_backend = None


def timeit(fn, repeats):
    fn()  # warmup
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats


def bench_kernels(batch, repeats):
    rng = np.random.default_rng(0)
    p = init_params(0)
    X = rng.normal(size=(batch, 5))
    dz = rng.normal(size=batch) / batch
    mods = {"python": py_backend}
    if cy_backend is not None:
        mods["cython"] = cy_backend

    outputs = {}
    print(f"kernel timings, batch={batch}, mean of {repeats} calls")
    print(f"{'kernel':<12} " + " ".join(f"{name:>12}" for name in mods))
    rows = {"forward": {}, "backward": {}, "adam":  {}}
    for name, mod in mods.items():
        H1, H2, z = mod.mlp_forward(*p.arrays, X)
        grads = mod.mlp_backward(p.W2, p.W3, X, H1, H2, dz)
        m = np.zeros_like(p.W1)
        outputs[name] = (z, grads[0])
        rows["forward"][name] = timeit(
            lambda: mod.mlp_forward(*p.arrays, X), repeats)
        rows["backward"][name] = timeit(
            lambda: mod.mlp_backward(p.W2, p.W3, X, H1, H2, dz), repeats)
        rows["adam"][name] = timeit(
            lambda: mod.adam_update(p.W1, grads[0], m, m, 3,
                                    0.001, 0.9, 0.999, 1e-8), repeats)
    for kernel, row in rows.items():
        print(f"{kernel:<12} " + " ".join(f"{row[n] * 1e6:>10.1f}us"
                                          for n in mods))
    if cy_backend is not None:
        z_ok = np.allclose(outputs["python"][0], outputs["cython"][0])
        g_ok = np.allclose(outputs["python"][1], outputs["cython"][1])
        print(f"backends agree: forward={z_ok} backward={g_ok}")


def bench_training(epochs):
    rng = np.random.default_rng(1)
    n = 4096
    X = rng.normal(size=(n, 5))
    a = rng.integers(0, 2, n)
    y = (X[:, 0] > 0).astype(np.int64)
    d = Dataset(features=X, labels=y, protected=a,
                feature_names=tuple(f"f{i}" for i in range(5)))
    cfg = TrainConfig(epochs=epochs, seed=0)
    print(f"\nend-to-end training, n={n}, epochs={epochs}")
    names = ["python"] + (["cython"] if cy_backend is not None else [])
    models = {}
    for name in names:
        backends.use(name)
        start = time.perf_counter()
        models[name] = train_baseline(d, cfg)
        print(f"{name:<12} {time.perf_counter() - start:>8.2f}s")
    if len(models) == 2:
        same = all(np.allclose(x, y, atol=1e-10) for x, y in
                   zip(models["python"].arrays, models["cython"].arrays))
        print(f"trained models agree: {same}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--batch", type=int, default=128)
    ap.add_argument("--repeats", type=int, default=200)
    ap.add_argument("--epochs", type=int, default=5)
    args = ap.parse_args()
    if cy_backend is None:
        print("compiled backend not built; timing the python backend only")
    bench_kernels(args.batch, args.repeats)
    bench_training(args.epochs)


if __name__ == "__main__":
    main()
