"""Exact k-nearest-neighbour and fixed-radius search over a point cloud."""

import numpy as np

from . import _backend
from ._tree import build_tree
from .errors import DimensionMismatch, EmptyPointSet, KTooLarge


def as_points(points):
    """Validate and return an ``(n, D)`` float64 C-contiguous array."""
    X = np.ascontiguousarray(points, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise DimensionMismatch(f"expected an (n, D) array, got shape {X.shape}")
    if X.shape[0] == 0:
        raise EmptyPointSet("point set is empty")
    if X.shape[1] < 1:
        raise DimensionMismatch("ambient dimension must be >= 1")
    if not np.all(np.isfinite(X)):
        raise ValueError("point coordinates must be finite")
    return X


class NeighborIndex:
    """Immutable kd-tree over the rows of ``points``.

    Row identifiers are the original row positions. Queries are exact:
    distances are Euclidean, and equal distances are ordered by row id.
    """

    def __init__(self, points):
        self._tree = build_tree(as_points(points))

    @property
    def points(self):
        return self._tree.data

    @property
    def n(self):
        return self._tree.data.shape[0]

    @property
    def dim(self):
        return self._tree.data.shape[1]

    def __len__(self):
        return self.n

    def _query_vector(self, query):
        q = np.ascontiguousarray(query, dtype=np.float64).reshape(-1)
        if q.shape[0] != self.dim:
            raise DimensionMismatch(f"query has dimension {q.shape[0]}, index has {self.dim}")
        return q

    def knn(self, query, k, exclude=None):
        """Return ``(ids, distances)`` of the ``k`` nearest rows, ascending.

        ``exclude`` drops one row id from consideration (self-match control).
        """
        q = self._query_vector(query)
        available = self.n - (0 if exclude is None or not 0 <= exclude < self.n else 1)
        if k < 1:
            raise ValueError("k must be >= 1")
        if k > available:
            raise KTooLarge(f"k={k} exceeds the {available} available points")
        ex = -1 if exclude is None else int(exclude)
        ids, d2 = _backend.kernels.knn(self._tree, q, int(k), ex)
        return ids, np.sqrt(d2)

    def radius_query(self, query, r):
        """Sorted ids of rows within Euclidean distance ``r`` (closed ball)."""
        if not r > 0:
            raise ValueError("radius must be positive")
        q = self._query_vector(query)
        return _backend.kernels.radius(self._tree, q, float(r))


def build_index(points):
    return NeighborIndex(points)
