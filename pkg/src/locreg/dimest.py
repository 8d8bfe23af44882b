"""Levina-Bickel maximum-likelihood estimate of intrinsic dimension.

For a point with neighbour distances ``T_1 <= ... <= T_k`` (itself excluded)
the local estimate is ``(k - 1) / sum_{j<k} log(T_k / T_j)``; the block
estimate averages the local ones.
"""

from dataclasses import dataclass

import numpy as np

from .errors import AllPointsDegenerate, KOutOfRange
from .neighbors import NeighborIndex, as_points


@dataclass(frozen=True)
class DimEstimate:
    k: int
    ids: np.ndarray         # block rows with a usable estimate, block order
    per_point: np.ndarray   # aligned with ``ids``
    skipped: np.ndarray     # block rows with degenerate distances
    d_hat: float


def local_mle(distances):
    """Estimate from the ``k`` ascending neighbour distances of one point.

    Returns ``None`` when the log-ratio sum is zero or undefined.
    """
    T = np.asarray(distances, dtype=np.float64)
    if T[0] <= 0.0 or T[-1] == T[0]:
        return None
    s = float(np.sum(np.log(T[-1] / T[:-1])))
    if not s > 0.0:
        return None
    return (T.size - 1) / s


def estimate_dimension(points, block=None, k=15, index=None):
    X = as_points(points)
    n = X.shape[0]
    if not 3 <= k <= n - 1:
        raise KOutOfRange(f"k={k} must satisfy 3 <= k <= n - 1 = {n - 1}")
    block = np.arange(n) if block is None else np.asarray(block, dtype=np.int64).reshape(-1)
    if block.size == 0:
        raise ValueError("block is empty")
    if index is None:
        index = NeighborIndex(X)
    ids, est, skipped = [], [], []
    for j in block.tolist():
        _, dist = index.knn(X[j], k, exclude=j)
        m = local_mle(dist)
        if m is None:
            skipped.append(j)
        else:
            ids.append(j)
            est.append(m)
    if not est:
        raise AllPointsDegenerate("every block point has degenerate neighbour distances")
    per_point = np.array(est)
    return DimEstimate(
        k=k,
        ids=np.array(ids, dtype=np.int64),
        per_point=per_point,
        skipped=np.array(skipped, dtype=np.int64),
        d_hat=float(np.mean(per_point)),
    )
