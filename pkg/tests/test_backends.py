import os
import subprocess
import sys

import numpy as np
import pytest

from locreg import _pykernels
from locreg._tree import build_tree
from locreg.locpoly import PolyBasis
from locreg.synth import GenConfig, generate

ck = pytest.importorskip("locreg._ckernels")


@pytest.mark.parametrize("family", [0, 1])
@pytest.mark.parametrize("q", [0, 1, 2])
def test_fit_points_agree(family, q):
    gen = generate(GenConfig(300, 2, 0.05))
    X, Y = gen.dataset.X, gen.dataset.Y
    exps = PolyBasis(q, 3).exponents
    Q = X[:60]
    ex = np.where(np.arange(60) % 3 == 0, np.arange(60), -1).astype(np.int64)
    for h in (0.3, 1.0, 2.5):
        a = _pykernels.fit_points(X, Y, Q, ex, h, family, exps)
        b = ck.fit_points(X, Y, Q, ex, h, family, exps)
        assert np.array_equal(a[2], b[2])
        assert np.array_equal(a[3], b[3])
        full = a[3] == exps.shape[0]
        np.testing.assert_allclose(b[0][full, 0], a[0][full, 0], rtol=1e-9, atol=1e-9)
        np.testing.assert_allclose(b[1], a[1], rtol=1e-9, atol=1e-12)


def test_knn_and_radius_identical():
    X = np.random.default_rng(5).normal(size=(400, 4))
    tree = build_tree(X)
    for i, q in enumerate(X[:40]):
        for k in (1, 7, 50):
            ia, da = _pykernels.knn(tree, q, k, i)
            ib, db = ck.knn(tree, q, k, i)
            assert np.array_equal(ia, ib) and np.array_equal(da, db)
        assert np.array_equal(_pykernels.radius(tree, q, 1.1), ck.radius(tree, q, 1.1))


def test_env_forces_python_backend():
    env = dict(os.environ, LOCREG_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", "import locreg; print(locreg.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_default_backend_is_compiled():
    env = {k: v for k, v in os.environ.items() if k != "LOCREG_BACKEND"}
    out = subprocess.run([sys.executable, "-c", "import locreg; print(locreg.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "cython"
