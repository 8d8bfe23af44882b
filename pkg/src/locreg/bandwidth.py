"""Blockwise leave-one-out (mCV) and generalised (mGCV) bandwidth selection.

Only the block rows are scored, but every fit uses the whole sample.
Candidates are ``lambda_b * n ** (-1 / (d_hat + 4))``.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ._parallel import ordered_map
from .errors import BadGrid, Infeasible, NoFeasibleBandwidth
from .kernels import KernelSpec
from .locpoly import fit_arrays, loo_prediction

DEFAULT_LAMBDAS = tuple(np.geomspace(0.3, 6.0, 20).tolist())

# S_h(j, j) this close to 1 makes the leave-one-out denominator meaningless
S_SELF_CEILING = 1.0 - 1e-10


@dataclass(frozen=True)
class BandwidthGrid:
    lambdas: np.ndarray
    n: int
    d_hat: float
    candidates: np.ndarray


@dataclass(frozen=True)
class CriterionScore:
    h: float
    mgcv: Optional[float]       # None marks an infeasible candidate
    atr: Optional[float]
    rss_block: Optional[float]
    reason: str = ""

    @property
    def feasible(self):
        return self.mgcv is not None


@dataclass(frozen=True)
class BandwidthSelection:
    grid: Optional[BandwidthGrid]
    scores: List[CriterionScore]
    chosen: float
    chosen_index: int = field(default=-1)


def candidate_bandwidths(lambdas, n, d_hat):
    lam = np.asarray(lambdas, dtype=np.float64).reshape(-1)
    if lam.size == 0:
        raise BadGrid("empty lambda grid")
    if not np.all(np.isfinite(lam)) or np.any(lam <= 0):
        raise BadGrid("lambdas must be positive and finite")
    if np.any(np.diff(lam) <= 0):
        raise BadGrid("lambdas must be strictly ascending")
    if n < 2:
        raise BadGrid("n must be >= 2")
    if not d_hat > 0:
        raise BadGrid("d_hat must be positive")
    h = lam * float(n) ** (-1.0 / (d_hat + 4.0))
    return BandwidthGrid(lam, int(n), float(d_hat), h)


def _block_fit(data, block, h, basis, kernel_family):
    """Residuals and smoother diagonals over the block, or raise Infeasible."""
    kernel = KernelSpec(kernel_family, h, data.D)
    block = np.asarray(block, dtype=np.int64).reshape(-1)
    coef, s_self, support, rank = fit_arrays(data, data.X[block], kernel, basis)
    if np.any(support == 0):
        bad = block[support == 0][0]
        raise Infeasible(h, f"no kernel support at row {bad}")
    if np.any(rank < len(basis)):
        bad = block[rank < len(basis)][0]
        raise Infeasible(h, f"rank-deficient self-fit at row {bad}")
    resid = data.Y[block] - coef[:, 0]
    return resid, s_self


def mcv(data, block, h, basis, kernel_family="epanechnikov"):
    """Leave-one-out block score through the smoother-diagonal identity."""
    resid, S = _block_fit(data, block, h, basis, kernel_family)
    if np.any(S >= S_SELF_CEILING):
        raise Infeasible(h, "smoother diagonal reaches 1")
    return float(np.mean((resid / (1.0 - S)) ** 2))


def mcv_direct(data, block, h, basis, kernel_family="epanechnikov"):
    """Brute-force leave-one-out average with one refit per block row."""
    kernel = KernelSpec(kernel_family, h, data.D)
    errs = [data.Y[j] - loo_prediction(data, j, kernel, basis) for j in np.asarray(block).tolist()]
    return float(np.mean(np.square(errs)))


def mgcv(data, block, h, basis, kernel_family="epanechnikov"):
    """Score one candidate; infeasible candidates get ``mgcv=None`` and a reason."""
    try:
        resid, S = _block_fit(data, block, h, basis, kernel_family)
    except Infeasible as exc:
        return CriterionScore(h, None, None, None, exc.reason)
    rss = float(np.mean(resid ** 2))
    atr = float(np.mean(S))
    if not 0.0 < atr < S_SELF_CEILING:
        return CriterionScore(h, None, atr, rss, "average smoother diagonal outside (0, 1)")
    return CriterionScore(h, rss / (1.0 - atr) ** 2, atr, rss)


def select_scores(scores):
    """Index of the smallest feasible score; ties go to the earliest entry."""
    best = -1
    for i, sc in enumerate(scores):
        if sc.feasible and (best < 0 or sc.mgcv < scores[best].mgcv):
            best = i
    if best < 0:
        raise NoFeasibleBandwidth("no candidate bandwidth is feasible")
    return best


def select_bandwidth(data, block, grid, basis, kernel_family="epanechnikov"):
    """Minimise mGCV over ``grid`` (a BandwidthGrid or an ascending list of h)."""
    if isinstance(grid, BandwidthGrid):
        hs = grid.candidates
    else:
        hs = np.asarray(grid, dtype=np.float64).reshape(-1)
        if hs.size == 0 or np.any(hs <= 0) or np.any(np.diff(hs) <= 0):
            raise BadGrid("bandwidths must be positive and strictly ascending")
        grid = None
    scores = ordered_map(lambda h: mgcv(data, block, float(h), basis, kernel_family), hs)
    best = select_scores(scores)
    return BandwidthSelection(grid, scores, scores[best].h, best)
