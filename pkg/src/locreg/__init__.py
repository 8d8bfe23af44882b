"""Local polynomial regression on data near low-dimensional manifolds."""

from ._backend import NAME as BACKEND
from .bandwidth import (
    BandwidthGrid,
    BandwidthSelection,
    CriterionScore,
    DEFAULT_LAMBDAS,
    candidate_bandwidths,
    mcv,
    mcv_direct,
    mgcv,
    select_bandwidth,
)
from .dimest import DimEstimate, estimate_dimension
from .errors import *  # noqa: F401,F403
from .kernels import KernelSpec, kernel_value, support_radius
from .locpoly import (
    Dataset,
    LocalFit,
    PolyBasis,
    Standardizer,
    build_design,
    fit_block,
    local_fit,
    loo_prediction,
    standardize,
)
from .neighbors import NeighborIndex, build_index

__version__ = "0.1.0"
