import numpy as np
import pytest

from locreg import _backend, _pykernels

try:
    from locreg import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels


@pytest.fixture(params=sorted(BACKENDS))
def backend(request, monkeypatch):
    """Run the test once per available kernel backend."""
    monkeypatch.setattr(_backend, "kernels", BACKENDS[request.param])
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def scan_knn(points, q, k, exclude=None):
    """Exhaustive oracle: squared distances summed coordinate by coordinate."""
    d2 = np.zeros(points.shape[0])
    for a in range(points.shape[1]):
        t = points[:, a] - q[a]
        d2 = d2 + t * t
    ids = np.arange(points.shape[0])
    if exclude is not None:
        keep = ids != exclude
        ids, d2 = ids[keep], d2[keep]
    order = np.lexsort((ids, d2))[:k]
    return ids[order], np.sqrt(d2[order])


def scan_radius(points, q, r):
    d2 = np.zeros(points.shape[0])
    for a in range(points.shape[1]):
        t = points[:, a] - q[a]
        d2 = d2 + t * t
    return np.flatnonzero(np.sqrt(d2) <= r)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
