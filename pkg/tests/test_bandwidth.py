import math

import numpy as np
import pytest

from locreg import (
    Dataset, KernelSpec, PolyBasis, candidate_bandwidths, fit_block, mcv, mcv_direct, mgcv,
    select_bandwidth, standardize,
)
from locreg.bandwidth import CriterionScore, DEFAULT_LAMBDAS, select_scores
from locreg.errors import BadGrid, Infeasible, NoFeasibleBandwidth
from locreg.dimest import estimate_dimension
from locreg.synth import GenConfig, generate, middle_block

EPA = "epanechnikov"


def test_default_grid():
    lam = np.array(DEFAULT_LAMBDAS)
    assert lam.size == 20
    assert lam[0] == pytest.approx(0.3) and lam[-1] == pytest.approx(6.0)
    np.testing.assert_allclose(np.diff(np.log(lam)), np.log(20) / 19)


def test_candidate_formula():
    g = candidate_bandwidths([1.0], 16, 1.0)
    assert g.candidates[0] == pytest.approx(math.exp(-math.log(16) / 5), rel=1e-15)
    assert g.candidates[0] == pytest.approx(0.5743, abs=1e-4)
    g2 = candidate_bandwidths([2.0], 16, 1.0)
    assert g2.candidates[0] == 2 * g.candidates[0]


def test_candidate_monotone_in_dimension():
    hs = [candidate_bandwidths([1.0], 200, d).candidates[0] for d in (0.5, 1.0, 2.0, 5.0)]
    assert all(b > a for a, b in zip(hs, hs[1:]))


@pytest.mark.parametrize("lams,n,d", [([], 10, 1.0), ([1.0, 1.0], 10, 1.0), ([2.0, 1.0], 10, 1.0),
                                      ([-1.0], 10, 1.0), ([1.0], 1, 1.0), ([1.0], 10, 0.0)])
def test_bad_grid(lams, n, d):
    with pytest.raises(BadGrid):
        candidate_bandwidths(lams, n, d)


def _random_instance(seed, family=EPA):
    r = np.random.default_rng(seed)
    n = int(r.integers(20, 51))
    D = int(r.integers(1, 4))
    X = r.uniform(-1, 1, size=(n, D))
    data = Dataset(X, np.sin(2 * X.sum(1)) + 0.3 * r.normal(size=n))
    block = r.choice(n, size=min(n, 10), replace=False)
    h = 1.6 if family == EPA else 0.7
    return data, block, h, PolyBasis(1, D)


def test_mcv_single_point(backend):
    data, block, h, basis = _random_instance(3)
    j = block[:1]
    (f,) = fit_block(data, j, KernelSpec(EPA, h, data.D), basis)
    expected = (data.Y[j[0]] - f.fitted) ** 2 / (1 - f.s_self) ** 2
    assert mcv(data, j, h, basis, EPA) == pytest.approx(expected, rel=1e-14)


def test_mcv_noiseless_linear(backend, rng):
    X = rng.uniform(-1, 1, size=(40, 2))
    data = Dataset(X, 1 + X @ np.array([2.0, -1.0]))
    assert mcv(data, range(10), 1.2, PolyBasis(1, 2), EPA) <= 1e-16


@pytest.mark.parametrize("family", [EPA, "gaussian"])
def test_mcv_identity_vs_refits(backend, family):
    checked = 0
    for seed in range(50):
        data, block, h, basis = _random_instance(seed, family)
        try:
            fast = mcv(data, block, h, basis, family)
        except Infeasible:
            continue
        checked += 1
        assert fast == pytest.approx(mcv_direct(data, block, h, basis, family), abs=1e-8)
    assert checked >= 45


def test_mgcv_equals_mcv_single_point_block():
    data, block, h, basis = _random_instance(5)
    sc = mgcv(data, block[:1], h, basis, EPA)
    assert sc.mgcv == pytest.approx(mcv(data, block[:1], h, basis, EPA), rel=1e-14)


def test_mgcv_equal_diagonal_collapse():
    # q=0 with a huge gaussian bandwidth: every S_h(j, j) is 1/n
    r = np.random.default_rng(1)
    data = Dataset(r.uniform(size=(30, 2)), r.normal(size=30))
    fits = fit_block(data, range(8), KernelSpec("gaussian", 1e7, 2), PolyBasis(0, 2))
    S = np.array([f.s_self for f in fits])
    assert np.ptp(S) <= 1e-12
    a = mgcv(data, range(8), 1e7, PolyBasis(0, 2), "gaussian").mgcv
    b = mcv(data, range(8), 1e7, PolyBasis(0, 2), "gaussian")
    assert abs(a - b) <= 1e-10 * a


def test_atr_one_is_infeasible():
    data = Dataset([[0.0], [1.0], [2.0], [3.0]], [0.0, 1.0, 0.0, 1.0])
    sc = mgcv(data, [1, 2], 0.5, PolyBasis(0, 1), EPA)
    assert not sc.feasible and sc.mgcv is None
    assert sc.atr == pytest.approx(1.0)
    with pytest.raises(Infeasible):
        mcv(data, [1, 2], 0.5, PolyBasis(0, 1), EPA)


def test_rank_deficient_is_infeasible():
    data = Dataset([[0.0], [1.0], [2.0], [3.0]], [0.0, 1.0, 0.0, 1.0])
    sc = mgcv(data, [1, 2], 0.5, PolyBasis(1, 1), EPA)
    assert not sc.feasible and "rank" in sc.reason


def _score(h, v):
    return CriterionScore(h, v, None if v is None else 0.1, None if v is None else v)


def test_select_argmin_and_ties():
    assert select_scores([_score(1, 3.0), _score(2, 1.0), _score(3, 2.0)]) == 1
    assert select_scores([_score(1, 1.0), _score(2, 1.0)]) == 0
    assert select_scores([_score(1, None), _score(2, 5.0), _score(3, None)]) == 1
    with pytest.raises(NoFeasibleBandwidth):
        select_scores([_score(1, None)])


def test_select_skips_infeasible(backend):
    data = Dataset(np.linspace(0, 1, 11)[:, None], np.linspace(0, 1, 11) ** 2)
    sel = select_bandwidth(data, [4, 5, 6], [0.01, 0.05, 0.3, 0.6], PolyBasis(1, 1), EPA)
    assert [s.feasible for s in sel.scores] == [False, False, True, True]
    assert sel.chosen in (0.3, 0.6)
    with pytest.raises(NoFeasibleBandwidth):
        select_bandwidth(data, [4, 5, 6], [0.01, 0.05], PolyBasis(1, 1), EPA)


def _section4(seed=0):
    data, _ = standardize(generate(GenConfig(200, seed)).dataset)
    block = middle_block(data, 100)
    d_hat = estimate_dimension(data.X, block, 15).d_hat
    return data, block, candidate_bandwidths(DEFAULT_LAMBDAS, 200, d_hat)


def test_selected_score_on_generator(backend):
    data, block, grid = _section4(1)
    sel = select_bandwidth(data, block, grid, PolyBasis(1, 3), EPA)
    chosen = sel.scores[sel.chosen_index]
    assert math.isfinite(chosen.mgcv) and 0 < chosen.atr < 1
    assert chosen.mgcv == min(s.mgcv for s in sel.scores if s.feasible)


def test_response_shift_invariance():
    data, block, grid = _section4(2)
    basis = PolyBasis(1, 3)
    shifted = data.with_response(data.Y + 17.5)
    a = select_bandwidth(data, block, grid, basis, EPA)
    b = select_bandwidth(shifted, block, grid, basis, EPA)
    assert a.chosen == b.chosen
    for sa, sb in zip(a.scores, b.scores):
        assert sa.feasible == sb.feasible
        if sa.feasible:
            assert sb.mgcv == pytest.approx(sa.mgcv, rel=1e-10, abs=1e-10)
    h = a.chosen
    assert mcv(shifted, block, h, basis, EPA) == pytest.approx(mcv(data, block, h, basis, EPA), rel=1e-10)


def test_response_scale_argmin_invariance():
    data, block, grid = _section4(3)
    basis = PolyBasis(1, 3)
    c = 3.7
    a = select_bandwidth(data, block, grid, basis, EPA)
    b = select_bandwidth(data.with_response(c * data.Y), block, grid, basis, EPA)
    assert a.chosen == b.chosen
    for sa, sb in zip(a.scores, b.scores):
        if sa.feasible:
            assert sb.mgcv == pytest.approx(c * c * sa.mgcv, rel=1e-10)
