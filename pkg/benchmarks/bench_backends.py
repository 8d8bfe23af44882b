"""Time the compiled and pure-Python kernels on the same workloads.

    python benchmarks/bench_backends.py [--repeat 3]
"""

import argparse
import time

import numpy as np

from locreg import _pykernels
from locreg._tree import build_tree
from locreg.bandwidth import DEFAULT_LAMBDAS
from locreg.locpoly import PolyBasis, standardize
from locreg.synth import GenConfig, generate, middle_block

try:
    from locreg import _ckernels
except ImportError:
    _ckernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def workloads():
    data, _ = standardize(generate(GenConfig(2000, 1)).dataset)
    X, Y = data.X, data.Y
    tree = build_tree(X)
    block = middle_block(data, 100)
    exps = PolyBasis(1, 3).exponents
    Q = X[block]
    none = np.full(len(block), -1, dtype=np.int64)
    hs = np.asarray(DEFAULT_LAMBDAS) * 200 ** (-1 / 5)

    def knn(k):
        return lambda: [k.knn(tree, X[j], 15, j) for j in block]

    def radius(k):
        return lambda: [k.radius(tree, X[j], 0.3) for j in block]

    def fits(k):
        return lambda: [k.fit_points(X, Y, Q, none, h, 0, exps, 1.0, tree) for h in hs]

    return {
        "knn k=15, 100 queries, n=2000": knn,
        "radius r=0.3, 100 queries, n=2000": radius,
        "mGCV grid: 20 h x 100 local fits, n=2000": fits,
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"{'workload':45s} {'python [s]':>11s} {'cython [s]':>11s} {'speedup':>8s}")
    for name, make in workloads().items():
        tp = best_of(make(_pykernels), args.repeat)
        if _ckernels is None:
            print(f"{name:45s} {tp:11.4f} {'n/a':>11s}")
            continue
        tc = best_of(make(_ckernels), args.repeat)
        print(f"{name:45s} {tp:11.4f} {tc:11.4f} {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
