"""Flat-array kd-tree layout shared by the compiled and pure-Python query kernels."""

from dataclasses import dataclass

import numpy as np

LEAF_SIZE = 16


@dataclass(frozen=True)
class FlatTree:
    data: np.ndarray      # (n, D) float64, C order, original row order
    perm: np.ndarray      # (n,) int64, row ids grouped by node
    start: np.ndarray     # (m,) int64, slice of perm owned by node
    end: np.ndarray
    dim: np.ndarray       # split coordinate, -1 for leaves
    split: np.ndarray     # split value
    left: np.ndarray
    right: np.ndarray


def build_tree(data, leaf_size=LEAF_SIZE):
    """Median split on the coordinate of largest spread.

    Points with coordinate equal to the split value can land on either
    side; query pruning only relies on left <= split <= right.
    """
    data = np.ascontiguousarray(data, dtype=np.float64)
    n = data.shape[0]
    perm = np.arange(n, dtype=np.int64)
    start, end, dim, split, left, right = [], [], [], [], [], []

    def new_node(lo, hi):
        start.append(lo)
        end.append(hi)
        dim.append(-1)
        split.append(0.0)
        left.append(-1)
        right.append(-1)
        return len(start) - 1

    stack = [new_node(0, n)]
    while stack:
        node = stack.pop()
        lo, hi = start[node], end[node]
        if hi - lo <= leaf_size:
            continue
        ids = perm[lo:hi]
        pts = data[ids]
        spread = pts.max(axis=0) - pts.min(axis=0)
        d = int(np.argmax(spread))
        if spread[d] == 0.0:
            continue
        order = np.lexsort((ids, pts[:, d]))
        perm[lo:hi] = ids[order]
        mid = lo + (hi - lo) // 2
        dim[node] = d
        split[node] = float(data[perm[mid], d])
        left[node] = new_node(lo, mid)
        right[node] = new_node(mid, hi)
        stack.append(right[node])
        stack.append(left[node])

    as64 = lambda v: np.asarray(v, dtype=np.int64)
    return FlatTree(
        data=data,
        perm=perm,
        start=as64(start),
        end=as64(end),
        dim=as64(dim),
        split=np.asarray(split, dtype=np.float64),
        left=as64(left),
        right=as64(right),
    )
