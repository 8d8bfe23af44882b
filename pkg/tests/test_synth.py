import math

import numpy as np
import pytest

from locreg import Dataset, KernelSpec, PolyBasis, standardize
from locreg.errors import BlockTooLarge, DimensionMismatch
from locreg.locpoly import fit_arrays
from locreg.synth import (
    ON_MANIFOLD_ORIGIN, GenConfig, GeneratedData, bias_variance_probe, curve, default_sweep,
    generate, loglog_slope, middle_block, noise_sweep, rate_study, run_experiment,
    run_experiment_on, true_regression,
)


def test_true_regression_examples():
    assert true_regression([0.0, -1.0, 0.0]) == 0.0
    assert true_regression([0.0, 0.0, 0.0]) == 1.0
    p = math.pi
    x = (p, p ** 3 + math.sin(p) - 1, math.log(p ** 2 + 1) - p)
    assert true_regression(x) == pytest.approx(math.cos(p) + x[1] - x[2] ** 2, rel=1e-15)
    with pytest.raises(DimensionMismatch):
        true_regression([1.0, 2.0])


def test_on_manifold_identities():
    gen = generate(GenConfig(500, 9))
    X, t = gen.dataset.X, gen.latent
    np.testing.assert_array_equal(X[:, 0], t)
    np.testing.assert_allclose(X[:, 1], X[:, 0] ** 3 + np.sin(X[:, 0]) - 1, atol=1e-12)
    np.testing.assert_allclose(X[:, 2], np.log(X[:, 0] ** 2 + 1) - X[:, 0], atol=1e-12)
    np.testing.assert_array_equal(gen.truth, true_regression(X))


def test_generate_deterministic():
    a = generate(GenConfig(200, 7, 0.1))
    b = generate(GenConfig(200, 7, 0.1))
    assert np.array_equal(a.dataset.X, b.dataset.X)
    assert np.array_equal(a.dataset.Y, b.dataset.Y)
    c = generate(GenConfig(200, 8, 0.1))
    assert not np.array_equal(a.dataset.Y, c.dataset.Y)


def test_latent_stream_independent_of_noise_scale():
    a = generate(GenConfig(100, 4, 0.0))
    b = generate(GenConfig(100, 4, 0.2))
    assert np.array_equal(a.latent, b.latent)


def test_noise_channel_scale():
    for seed in range(20):
        gen = generate(GenConfig(200, seed, 0.2))
        t = gen.latent
        resid = gen.dataset.X[:, 1] - (t ** 3 + np.sin(t) - 1)
        assert 0.15 <= np.std(resid, ddof=1) <= 0.25


def test_middle_block_examples():
    data = Dataset([[10.0], [0.0], [5.0], [7.0]], [0.0] * 4)
    assert middle_block(data, 2).tolist() == [2, 3]
    assert sorted(middle_block(data, 4).tolist()) == [0, 1, 2, 3]
    with pytest.raises(BlockTooLarge):
        middle_block(data, 5)


def test_middle_block_ranks():
    data, _ = standardize(generate(GenConfig(200, 1)).dataset)
    ranked = sorted(range(200), key=lambda i: data.X[i, 0])
    assert middle_block(data, 100).tolist() == ranked[50:150]


def test_experiment_noiseless_linear():
    gen = generate(GenConfig(200, 3), regression=lambda X: 2.0 + 3.0 * X[:, 0], noise_scale=0.0)
    res = run_experiment_on(gen)
    assert res.mse_ull <= 1e-10 and res.mse_mll <= 1e-10


def test_ull_equals_mll_on_one_dimensional_data():
    gen = generate(GenConfig(200, 4))
    data, _ = standardize(gen.dataset)
    uni = data.columns([0])
    block = middle_block(uni, 100)
    basis = PolyBasis(1, 1)
    kern = KernelSpec("epanechnikov", 0.4, 1)
    a = fit_arrays(uni, uni.X[block], kern, basis)[0][:, 0]
    emb = Dataset(uni.X.copy(), uni.Y)  # identity embedding, D = 1
    b = fit_arrays(emb, emb.X[block], kern, basis)[0][:, 0]
    np.testing.assert_allclose(a, b, atol=1e-10)


def test_experiment_fields_and_determinism():
    a = run_experiment(GenConfig(200, 11))
    b = run_experiment(GenConfig(200, 11))
    assert a.summary() == b.summary()
    assert a.block.size == 100 and a.mse_ull >= 0 and a.mse_mll >= 0
    assert 0.5 < a.d_hat < 2


def test_experiment_row_permutation_invariance():
    gen = generate(GenConfig(200, 12))
    perm = np.random.default_rng(0).permutation(200)
    pgen = GeneratedData(Dataset(gen.dataset.X[perm], gen.dataset.Y[perm]),
                         gen.latent[perm], gen.truth[perm])
    a, b = run_experiment_on(gen), run_experiment_on(pgen)
    assert b.mse_mll == pytest.approx(a.mse_mll, rel=1e-10)
    assert b.mse_ull == pytest.approx(a.mse_ull, rel=1e-10)
    assert np.array_equal(perm[b.block], a.block)


def test_noise_sweep_zero_reduces_to_experiment():
    (row,) = noise_sweep([0.0], [5, 6])
    direct = [run_experiment(GenConfig(200, s)).mse_mll for s in (5, 6)]
    assert row.mean_mse == pytest.approx(np.mean(direct), rel=1e-15)


def test_default_sweep_values():
    assert default_sweep() == [0.02, 0.04, 0.06, 0.08, 0.10, 0.12, 0.14, 0.16, 0.18, 0.20]


def test_rate_study_constant_is_flagged():
    study = rate_study([100, 200, 400, 800], range(3), 1.0,
                       regression=lambda X: np.full(X.shape[0], 2.5), noise_scale=0.0)
    assert study.slope is None
    assert np.all(study.mse <= 1e-20)


def test_loglog_slope_exact():
    ns = np.array([10, 20, 40, 80])
    assert loglog_slope(ns, 3.0 * ns ** -0.8) == pytest.approx(-0.8, abs=1e-12)


def test_probe_noiseless_constant():
    b, v = bias_variance_probe(np.array(ON_MANIFOLD_ORIGIN), 0.8, 300, 100, 0,
                               regression=lambda X: np.full(X.shape[0], -1.0), noise_scale=0.0)
    assert abs(b) <= 1e-12 and v <= 1e-12


def test_curve_at_origin():
    np.testing.assert_array_equal(curve(np.array([0.0]))[0], ON_MANIFOLD_ORIGIN)


def test_curve_bias_decays_faster_than_h_squared():
    # The curve's curvature and torsion put the latent quadratic and cubic
    # terms in the span of the ambient linear design, so the exact
    # conditional bias shrinks roughly 16x per halving of h.
    x = np.array(ON_MANIFOLD_ORIGIN)
    b1, _ = bias_variance_probe(x, 0.5, 20000, 40, 1, noise_scale=0.0)
    b2, _ = bias_variance_probe(x, 0.25, 20000, 40, 2, noise_scale=0.0)
    assert 0.03 < b2 / b1 < 0.12


def test_line_bias_follows_h_squared():
    x = np.array(ON_MANIFOLD_ORIGIN)
    b1, _ = bias_variance_probe(x, 0.6, 4000, 40, 1, noise_scale=0.0, embedding="line")
    b2, _ = bias_variance_probe(x, 0.3, 4000, 40, 2, noise_scale=0.0, embedding="line")
    assert b2 / b1 == pytest.approx(0.25, abs=0.02)
