"""Radially symmetric kernels ``K_h(u) = h**-D * K(u / h)``.

Both families are unnormalised, ``K(0) = 1``.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._backend import EPANECHNIKOV, GAUSSIAN
from .errors import DimensionMismatch, NonPositiveBandwidth

FAMILIES = ("epanechnikov", "gaussian")
_CODES = {"epanechnikov": EPANECHNIKOV, "gaussian": GAUSSIAN}


@dataclass(frozen=True)
class KernelSpec:
    family: str
    h: float
    D: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; choose from {FAMILIES}")
        if not (self.h > 0 and math.isfinite(self.h)):
            raise NonPositiveBandwidth(f"bandwidth must be positive, got {self.h!r}")
        if self.D < 1:
            raise DimensionMismatch("kernel dimension must be >= 1")

    @property
    def code(self):
        return _CODES[self.family]

    def with_bandwidth(self, h):
        return KernelSpec(self.family, h, self.D)


def profile(family, v2):
    """Unnormalised kernel as a function of squared radius."""
    v2 = np.asarray(v2, dtype=np.float64)
    if family == "epanechnikov":
        return np.where(v2 < 1.0, 1.0 - v2, 0.0)
    return np.exp(-0.5 * v2)


def kernel_value(spec, u):
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    if u.shape[0] != spec.D:
        raise DimensionMismatch(f"offset has dimension {u.shape[0]}, kernel has {spec.D}")
    v2 = float(np.dot(u, u)) / (spec.h * spec.h)
    return spec.h ** (-spec.D) * float(profile(spec.family, v2))


def support_radius(spec):
    """``h`` for compact kernels, ``math.inf`` when the support is unbounded."""
    return spec.h if spec.family == "epanechnikov" else math.inf
