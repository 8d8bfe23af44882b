"""Pure-Python/numpy implementations of the hot kernels.

Same signatures and arithmetic order as the compiled ``_ckernels`` module.
"""

import heapq

import numpy as np
from scipy.linalg import svd

EPANECHNIKOV = 0
GAUSSIAN = 1

_EPS = np.finfo(np.float64).eps


def _sqdist(data, ids, q):
    """Squared distances, summed coordinate by coordinate."""
    acc = np.zeros(len(ids))
    for a in range(data.shape[1]):
        t = data[ids, a] - q[a]
        acc = acc + t * t
    return acc


def knn(tree, q, k, exclude):
    heap = []  # entries (-d2, -id); heap[0] is the current worst
    data = tree.data
    stack = [(0, 0.0)]
    while stack:
        node, bound = stack.pop()
        if len(heap) == k and bound > -heap[0][0]:
            continue
        d = tree.dim[node]
        if d < 0:
            ids = tree.perm[tree.start[node]:tree.end[node]]
            d2s = _sqdist(data, ids, q)
            for i, d2 in zip(ids.tolist(), d2s.tolist()):
                if i == exclude:
                    continue
                if len(heap) < k:
                    heapq.heappush(heap, (-d2, -i))
                elif (d2, i) < (-heap[0][0], -heap[0][1]):
                    heapq.heapreplace(heap, (-d2, -i))
            continue
        diff = q[d] - tree.split[node]
        far_bound = diff * diff
        if diff < 0:
            near, far = tree.left[node], tree.right[node]
        else:
            near, far = tree.right[node], tree.left[node]
        stack.append((far, far_bound))
        stack.append((near, bound))
    out = sorted((-nd2, -ni) for nd2, ni in heap)
    ids = np.array([i for _, i in out], dtype=np.int64)
    d2 = np.array([v for v, _ in out], dtype=np.float64)
    return ids, d2


def radius(tree, q, r):
    r2_prune = r * r * (1.0 + 1e-12)
    data = tree.data
    found = []
    stack = [0]
    while stack:
        node = stack.pop()
        d = tree.dim[node]
        if d < 0:
            ids = tree.perm[tree.start[node]:tree.end[node]]
            dist = np.sqrt(_sqdist(data, ids, q))
            found.extend(ids[dist <= r].tolist())
            continue
        diff = q[d] - tree.split[node]
        if diff < 0:
            near, far = tree.left[node], tree.right[node]
        else:
            near, far = tree.right[node], tree.left[node]
        if diff * diff <= r2_prune:
            stack.append(far)
        stack.append(near)
    return np.array(sorted(found), dtype=np.int64)


def kernel_weights(d2, h, scale, family):
    u2 = d2 / (h * h)
    if family == EPANECHNIKOV:
        return np.where(u2 < 1.0, scale * (1.0 - u2), 0.0)
    return scale * np.exp(-0.5 * u2)


def fit_points(X, Y, Q, exclude, h, family, exps, weight_scale=1.0, tree=None):
    """Weighted least-squares local polynomial fits at each row of ``Q``.

    ``tree`` is accepted for signature parity and ignored (full scan).
    Returns ``(coef, s_self, support, rank)``; ``s_self`` is NaN where the
    query coincides with no included row, ``support`` is 0 where no point
    carries weight (coefficients then NaN).
    """
    n, D = X.shape
    m = Q.shape[0]
    p = exps.shape[0]
    coef = np.full((m, p), np.nan)
    s_self = np.full(m, np.nan)
    support = np.zeros(m, dtype=np.int64)
    rank = np.zeros(m, dtype=np.int64)
    allids = np.arange(n)
    k0 = h ** (-D) * weight_scale
    for j in range(m):
        q = Q[j]
        d2 = _sqdist(X, allids, q)
        w = kernel_weights(d2, h, k0, family)
        if exclude[j] >= 0:
            w[exclude[j]] = 0.0
        keep = np.flatnonzero(w > 0.0)
        support[j] = keep.size
        if keep.size == 0:
            continue
        diff = X[keep] - q
        design = np.ones((keep.size, p))
        for c in range(p):
            for a in range(D):
                for _ in range(exps[c, a]):
                    design[:, c] *= diff[:, a]
        sw = np.sqrt(w[keep])
        A = design * sw[:, None]
        b = Y[keep] * sw
        U, s, Vt = svd(A, full_matrices=False, lapack_driver="gesvd")
        tol = _EPS * max(keep.size, p) * s[0]
        r = int(np.count_nonzero(s > tol))
        rank[j] = r
        c_k = (U[:, :r].T @ b) / s[:r]
        coef[j] = Vt[:r].T @ c_k
        if np.any(d2[keep] == 0.0):
            s_self[j] = sum(((Vt[:r, 0] / s[:r]) ** 2).tolist()) * k0
    return coef, s_self, support, rank
