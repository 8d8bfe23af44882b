"""Local polynomial weighted least squares at a point.

The fit at ``x`` minimises ``sum_i K_h(X_i - x) (Y_i - P(X_i - x))**2`` over
polynomials ``P`` of total degree ``q``; the estimate is the intercept.
Solves go through an SVD of the sqrt-weighted design, truncating singular
values below ``eps * max(rows, cols) * s_max`` (minimum-norm solution).
"""

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations_with_replacement
from math import comb
from typing import Optional

import numpy as np

from . import _backend
from .errors import DegenerateCoordinate, DimensionMismatch, NoSupport
from ._tree import build_tree
from .neighbors import as_points


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        X = as_points(self.X)
        Y = np.ascontiguousarray(self.Y, dtype=np.float64).reshape(-1)
        if Y.shape[0] != X.shape[0]:
            raise DimensionMismatch(f"{X.shape[0]} predictor rows but {Y.shape[0]} responses")
        if not np.all(np.isfinite(Y)):
            raise ValueError("responses must be finite")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def n(self):
        return self.X.shape[0]

    @cached_property
    def tree(self):
        """kd-tree over ``X``, built on first use; enumerates compact supports."""
        return build_tree(self.X)

    @property
    def D(self):
        return self.X.shape[1]

    def with_response(self, Y):
        return Dataset(self.X, Y)

    def columns(self, cols):
        return Dataset(self.X[:, list(cols)], self.Y)


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    def transform(self, X):
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.scale

    def inverse(self, Z):
        return np.asarray(Z, dtype=np.float64) * self.scale + self.mean


def standardize(data):
    """Centre each predictor and divide by its sample sd (ddof=1); ``Y`` untouched."""
    if data.n < 2:
        raise DegenerateCoordinate("standardisation needs at least two rows")
    mean = data.X.mean(axis=0)
    sd = data.X.std(axis=0, ddof=1)
    bad = np.flatnonzero(~(sd > 0))
    if bad.size:
        raise DegenerateCoordinate(f"coordinate(s) {bad.tolist()} are constant")
    st = Standardizer(mean, sd)
    return Dataset(st.transform(data.X), data.Y), st


class PolyBasis:
    """Monomials of total degree <= ``degree`` in ``D`` variables.

    Graded lexicographic order with the constant first, e.g. for D=2, q=2:
    ``1, u1, u2, u1^2, u1 u2, u2^2``.
    """

    def __init__(self, degree, D):
        if degree < 0:
            raise ValueError("degree must be >= 0")
        if D < 1:
            raise DimensionMismatch("D must be >= 1")
        self.degree = int(degree)
        self.D = int(D)
        rows = []
        for deg in range(self.degree + 1):
            for combo in combinations_with_replacement(range(self.D), deg):
                alpha = [0] * self.D
                for a in combo:
                    alpha[a] += 1
                rows.append(alpha)
        self.exponents = np.array(rows, dtype=np.int64).reshape(-1, self.D)
        assert len(rows) == comb(self.D + self.degree, self.degree)

    def __len__(self):
        return self.exponents.shape[0]

    def __repr__(self):
        return f"PolyBasis(degree={self.degree}, D={self.D})"

    @property
    def multi_indices(self):
        return [tuple(int(v) for v in row) for row in self.exponents]


@dataclass(frozen=True)
class LocalFit:
    coefficients: np.ndarray
    support_count: int
    effective_rank: int
    s_self: Optional[float] = None

    @property
    def fitted(self):
        return float(self.coefficients[0])

    @property
    def full_rank(self):
        return self.effective_rank == len(self.coefficients)


def build_design(X, x, basis):
    X = as_points(X)
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if X.shape[1] != x.shape[0] or basis.D != x.shape[0]:
        raise DimensionMismatch("point, query and basis dimensions disagree")
    diff = X - x
    out = np.ones((X.shape[0], len(basis)))
    for c, alpha in enumerate(basis.exponents):
        for a, e in enumerate(alpha):
            for _ in range(e):
                out[:, c] *= diff[:, a]
    return out


def _check(data, kernel, basis):
    if kernel.D != data.D or basis.D != data.D:
        raise DimensionMismatch(
            f"data D={data.D}, kernel D={kernel.D}, basis D={basis.D} must agree"
        )


def fit_arrays(data, queries, kernel, basis, exclude=None, weight_scale=1.0):
    """Vectorised core: ``(coef, s_self, support, rank)`` for each query row.

    Rows without support come back with ``support == 0`` and NaN
    coefficients instead of raising.
    """
    _check(data, kernel, basis)
    Q = np.ascontiguousarray(queries, dtype=np.float64).reshape(-1, data.D)
    if exclude is None:
        ex = np.full(Q.shape[0], -1, dtype=np.int64)
    else:
        ex = np.ascontiguousarray(exclude, dtype=np.int64).reshape(-1)
    tree = data.tree if kernel.family == "epanechnikov" else None
    return _backend.kernels.fit_points(
        data.X, data.Y, Q, ex, float(kernel.h), kernel.code, basis.exponents,
        float(weight_scale), tree,
    )


def _as_fit(coef, s_self, support, rank):
    s = None if np.isnan(s_self) else float(s_self)
    return LocalFit(np.array(coef), int(support), int(rank), s)


def local_fit(data, x, kernel, basis, exclude=None, weight_scale=1.0):
    """Fit at ``x``; ``exclude`` removes one row from the fitting set.

    ``s_self`` is filled in when ``x`` coincides with an included row.
    Raises ``NoSupport`` if no row carries positive weight.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != data.D:
        raise DimensionMismatch(f"query has dimension {x.shape[0]}, data has {data.D}")
    if exclude is not None and not 0 <= exclude < data.n:
        raise IndexError(f"excluded row {exclude} out of range")
    ex = None if exclude is None else [exclude]
    coef, s_self, support, rank = fit_arrays(data, x, kernel, basis, ex, weight_scale)
    if support[0] == 0:
        raise NoSupport(f"no data within the kernel support at h={kernel.h}", row_id=None)
    return _as_fit(coef[0], s_self[0], support[0], rank[0])


def fit_block(data, block, kernel, basis, weight_scale=1.0):
    """Self-inclusive fits at each block row; ``s_self`` is ``S_h(j, j)``."""
    block = np.asarray(block, dtype=np.int64).reshape(-1)
    if np.unique(block).size != block.size:
        raise ValueError("block ids must be distinct")
    if block.size and (block.min() < 0 or block.max() >= data.n):
        raise IndexError("block id out of range")
    coef, s_self, support, rank = fit_arrays(
        data, data.X[block], kernel, basis, weight_scale=weight_scale
    )
    fits = []
    for t, j in enumerate(block.tolist()):
        if support[t] == 0:
            raise NoSupport(f"row {j} has no support at h={kernel.h}", row_id=j)
        fits.append(_as_fit(coef[t], s_self[t], support[t], rank[t]))
    return fits


def loo_prediction(data, j, kernel, basis):
    """Fit at ``X_j`` with row ``j`` removed from the fitting set."""
    return local_fit(data, data.X[j], kernel, basis, exclude=j).fitted
