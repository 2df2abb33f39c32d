import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from srff.exceptions import PreconditionError, SRFFError
from srff.orthopoly import gegenbauer, sphere_constant
from srff.spherical import (SphericalRule, haar_batch, make_rng, okq_weights,
                            sample_haar_orthogonal, sample_sphere, sample_sphere_mc,
                            sample_sphere_omc, sample_sphere_somc, sphere_kernel_gram,
                            sphere_kernel_mean)


def test_streams_are_reproducible_and_distinct():
    a = sample_sphere_mc(5, 10, seed=3, stream_id=1)
    assert a == sample_sphere_mc(5, 10, seed=3, stream_id=1)
    assert a != sample_sphere_mc(5, 10, seed=3, stream_id=2)
    assert a != sample_sphere_mc(5, 10, seed=4, stream_id=1)


def test_mc_moments():
    rule = sample_sphere_mc(4, 10**5, seed=1)
    np.testing.assert_allclose(np.linalg.norm(rule.theta, axis=1), 1.0, atol=1e-14)
    assert np.all(np.abs(rule.theta.mean(axis=0)) <= 4 / math.sqrt(1e5))
    cov = rule.theta.T @ rule.theta / rule.M_S
    np.testing.assert_allclose(cov, np.eye(4) / 4, atol=0.01)
    single = sample_sphere_mc(4, 1)
    assert single.M_S == 1 and single.b[0] == 1.0


def test_haar_orthogonal_and_marginal():
    rng = make_rng(0, 0)
    B = haar_batch(rng, 4, 10**4)
    err = np.abs(np.einsum("nij,nik->njk", B, B) - np.eye(4)).max()
    assert err <= 1e-12
    # first coordinate of a column has density proportional to (1 - t^2)^{(d-3)/2}
    c = sphere_constant(4)
    cdf = lambda t: c * (np.arcsin(t) + t * np.sqrt(1 - t * t)) / 2 + 0.5
    assert stats.kstest(B[:, 0, 1], cdf).pvalue > 0.001
    pos = np.mean(np.linalg.det(B) > 0)
    assert abs(pos - 0.5) <= 4 * 0.5 / math.sqrt(10**4)


def test_haar_needs_sign_correction():
    # without the diag(R) correction Q[0, 0] would always be negative or positive
    B = haar_batch(make_rng(1, 0), 3, 2000)
    assert 0.4 < np.mean(B[:, 0, 0] > 0) < 0.6
    Q = sample_haar_orthogonal(6, seed=2)
    np.testing.assert_allclose(Q.T @ Q, np.eye(6), atol=1e-13)


def test_omc_examples():
    d = 5
    rule = sample_sphere_omc(d, d, seed=7)
    np.testing.assert_allclose(rule.theta @ rule.theta.T, np.eye(d), atol=1e-10)
    v = make_rng(8, 0).standard_normal(d)
    v /= np.linalg.norm(v)
    assert abs(np.sum(gegenbauer(2, d, rule.theta @ v))) <= 1e-12
    big = sample_sphere_omc(d, 4 * d, seed=7)
    for i in range(0, 4 * d, d):
        block = big.theta[i:i + d]
        np.testing.assert_allclose(block @ block.T, np.eye(d), atol=1e-10)


def test_somc_antipodal():
    rule = sample_sphere_somc(3, 12, seed=5)
    v = np.array([0.2, -0.7, 0.4])
    assert abs(np.sum(rule.theta @ v)) <= 1e-14
    np.testing.assert_array_equal(rule.theta[:3], -rule.theta[3:6])


def test_divisibility_errors_name_multiple():
    with pytest.raises(PreconditionError, match="multiple of d=4"):
        sample_sphere_omc(4, 6)
    with pytest.raises(PreconditionError, match="multiple of 2d=8"):
        sample_sphere_somc(4, 12)
    with pytest.raises(PreconditionError):
        sample_sphere("lattice", 4, 8)


def test_omc_cross_covariance_vanishes():
    # distinct columns of one Haar matrix: E[P_2(<v, a>) P_3(<v, b>)] = 0
    d = 4
    B = haar_batch(make_rng(12, 0), d, 10**5)
    v = np.zeros(d)
    v[0] = 1.0
    vals = gegenbauer(2, d, B[:, 0, 0]) * gegenbauer(3, d, B[:, 0, 1])
    se = vals.std(ddof=1) / math.sqrt(vals.size)
    assert abs(vals.mean()) <= 4 * se


def test_sphere_gram_is_psd():
    for kind, M in (("mc", 40), ("omc", 40), ("somc", 40)):
        rule = sample_sphere(kind, 4, M, seed=1)
        K = sphere_kernel_gram(rule.theta, 1.0)
        np.testing.assert_array_equal(K, K.T)
        assert np.linalg.eigvalsh(K).min() >= -1e-8


def test_sphere_kernel_mean_monte_carlo():
    d, h = 4, 1.0
    th = sample_sphere_mc(d, 400000, seed=2).theta
    vals = np.exp(-(1 - th[:, 0]) / h**2)
    se = vals.std(ddof=1) / math.sqrt(vals.size)
    assert abs(vals.mean() - sphere_kernel_mean(d, h)) <= 4 * se


def test_okq_examples():
    theta = np.array([[0.6, 0.8, 0.0]])
    one = okq_weights(SphericalRule(3, theta, [1.0], "mc"), 1.0, jitter=0.0)
    assert one.b[0] == pytest.approx(sphere_kernel_mean(3, 1.0), rel=1e-14)
    pair = SphericalRule(3, np.vstack([theta, -theta]), [0.5, 0.5], "mc")
    w = okq_weights(pair, 1.0).b
    assert w[0] == pytest.approx(w[1], rel=1e-14)
    assert okq_weights(pair, 1.0).kind == "okq" and okq_weights(pair, 1.0).base_kind == "mc"


def test_okq_constant_error_decreases_with_nodes():
    errs = []
    for M in (8, 16, 32):
        rule = okq_weights(sample_sphere_omc(4, M, seed=9, stream_id=M), 1.0)
        errs.append(abs(rule.b.sum() - 1.0))
    assert errs[0] > errs[1] > errs[2]


def test_okq_is_optimal_in_worst_case_error():
    # OKQ weights minimise w^T K w - 2 mu 1^T w; any other weights do worse
    rule = sample_sphere_mc(4, 12, seed=4)
    K = sphere_kernel_gram(rule.theta, 1.0)
    mu = sphere_kernel_mean(4, 1.0)
    wce = lambda w: w @ K @ w - 2 * mu * w.sum()
    w_okq = okq_weights(rule, 1.0, jitter=0.0).b
    rng = make_rng(4, 1)
    for _ in range(20):
        assert wce(w_okq) <= wce(w_okq + 0.01 * rng.standard_normal(12)) + 1e-14
    assert wce(w_okq) <= wce(rule.b)


def test_okq_errors():
    theta = np.array([[1.0, 0.0], [1.0, 0.0]])
    with pytest.raises(PreconditionError, match="distinct"):
        okq_weights(SphericalRule(2, theta, [0.5, 0.5], "mc"))
    close = np.array([[1.0, 0.0], [math.cos(1e-9), math.sin(1e-9)]])
    with pytest.raises(SRFFError, match="jitter"):
        okq_weights(SphericalRule(2, close, [0.5, 0.5], "mc"), jitter=0.0)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 9), st.integers(1, 4), st.integers(0, 10**6))
def test_omc_property_unit_and_orthogonal(d, blocks, seed):
    rule = sample_sphere_omc(d, d * blocks, seed=seed)
    for i in range(blocks):
        B = rule.theta[i * d:(i + 1) * d]
        assert np.abs(B @ B.T - np.eye(d)).max() <= 1e-12
    np.testing.assert_allclose(rule.b.sum(), 1.0, rtol=1e-15)
