import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from srff.acceptance import MC_SERIES_D3_BETA1
from srff.analysis import (ErrorReport, bound_thm1, bound_thm2, default_ridge, mc_error_series,
                           parseval_sum, radial_bound_term, rel_frobenius, replicate_mse,
                           spectral_deviation, spherical_bound_term_mc, spherical_bound_term_omc,
                           spherical_stage_mse)
from srff.exceptions import PreconditionError, SRFFError
from srff.features import build_map, build_qmc_halton, kappa_hat
from srff.radial import KernelSpec, f_bar, gauss_laguerre, radial_quadrature_error


def test_rel_frobenius_examples():
    K = np.array([[1, 0.5], [0.5, 1]])
    assert rel_frobenius(K, K) == 0.0
    assert rel_frobenius(np.eye(2), np.zeros((2, 2))) == 1.0
    Kh = np.array([[1, 0.4], [0.4, 1]])
    # |K - Kh|_F^2 = 2 * 0.1^2 and |K|_F^2 = 2.5
    assert rel_frobenius(K, Kh) == pytest.approx(math.sqrt(0.02 / 2.5), rel=1e-14)
    with pytest.raises(PreconditionError):
        rel_frobenius(K, np.eye(3))
    with pytest.raises(PreconditionError):
        rel_frobenius(np.zeros((2, 2)), K)


@given(st.floats(1e-3, 1e3))
def test_rel_frobenius_scale_invariant(c):
    K = np.array([[1, 0.5], [0.5, 1]])
    Kh = np.array([[0.9, 0.3], [0.3, 1.2]])
    assert rel_frobenius(c * K, c * Kh) == pytest.approx(rel_frobenius(K, Kh), rel=1e-14)


def test_spectral_deviation_examples():
    K = np.array([[2.0, 0.5], [0.5, 1.0]])
    assert spectral_deviation(K, K, 0.0) <= 1e-10
    assert spectral_deviation(np.eye(3), 2 * np.eye(3), 0.0) == pytest.approx(1.0, rel=1e-14)
    assert spectral_deviation(np.diag([4.0, 1.0]), np.diag([4.0, 2.0]), 0.0) == pytest.approx(1.0)
    assert default_ridge(np.diag([4.0, 2.0])) == pytest.approx(3e-8)


def test_spectral_deviation_singular_needs_ridge():
    K = np.ones((3, 3))
    with pytest.raises(SRFFError, match="ridge"):
        spectral_deviation(K, K, 0.0)
    # condition number of K + ridge I is ~3e8, which sets the rounding floor
    assert spectral_deviation(K, K) == pytest.approx(0.0, abs=1e-6)


def test_spectral_deviation_orthogonal_invariance():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((6, 6))
    K = A @ A.T + np.eye(6)
    Kh = K + 0.1 * np.diag(rng.standard_normal(6))
    Q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    g1 = spectral_deviation(K, Kh, 0.0)
    g2 = spectral_deviation(Q @ K @ Q.T, Q @ Kh @ Q.T, 0.0)
    assert abs(g1 - g2) <= 1e-8


def test_error_report_validation():
    ErrorReport("RFF", 2, 1.0, 1, 4, 4, 0, 0.1)
    with pytest.raises(ValueError):
        ErrorReport("RFF", 2, 1.0, 1, 4, 4, 0, -0.1)
    with pytest.raises(ValueError):
        ErrorReport("RFF", 2, 1.0, 1, 4, 4, 0, 0.1, spectral_dev=math.nan)


def test_bounds_at_zero_and_monotone():
    assert bound_thm1(4, 2, 8, 0.0) == 0.0 and bound_thm2(4, 2, 8, 0.0) == 0.0
    for bound in (bound_thm1, bound_thm2):
        vals = [bound(4, 2, M, 0.4) for M in (4, 8, 16, 32)]
        assert all(a > b for a, b in zip(vals, vals[1:]))
    with pytest.raises(PreconditionError):
        bound_thm1(4, 0, 8, 0.5)
    assert bound_thm1(4, 50, 8, 5.0) == math.inf


@settings(max_examples=10)
@given(st.integers(2, 30), st.integers(1, 6), st.integers(1, 200), st.floats(0.01, 1.0),
       st.floats(0.1, 10.0))
def test_bounds_match_direct_formula(d, M_R, M_S, c, L):
    A = (4 * M_R + d) / (d - 1)
    k = 2 * M_R - 1
    radial = 2 * L * c**2 / math.sqrt(math.gamma(d / 2)) * (c**2 / k) ** k
    mc = 2 * (8 / M_S) * A**2 * c**4 * math.exp(4 * A * c**2)
    omc = 2 * (2 / M_S) * A**4 * c**8 * math.exp(4 * A * c**2)
    assert radial_bound_term(d, M_R, c, L) == pytest.approx(radial, rel=1e-12)
    assert bound_thm1(d, M_R, M_S, c, L) == pytest.approx(radial + mc, rel=1e-12)
    assert bound_thm2(d, M_R, M_S, c, L) == pytest.approx(radial + omc, rel=1e-12)
    # the spherical terms differ by exactly A^2 c^4 / 4
    ratio = spherical_bound_term_omc(d, M_R, M_S, c) / spherical_bound_term_mc(d, M_R, M_S, c)
    assert ratio == pytest.approx(A**2 * c**4 / 4, rel=1e-12)


def test_mc_error_series_examples():
    assert mc_error_series(5, 0.0, 3) == 0.0
    assert mc_error_series(3, 1.0, 1) == pytest.approx(MC_SERIES_D3_BETA1, rel=1e-12)
    assert mc_error_series(3, 1.0, 4) == pytest.approx(MC_SERIES_D3_BETA1 / 4, rel=1e-12)


def test_mc_error_series_mpmath_oracle():
    # independent integration of lambda_k with mpmath for d=5
    d, beta = 5, 1.3
    mpmath.mp.dps = 30
    c = mpmath.gamma(mpmath.mpf(d) / 2) / (mpmath.sqrt(mpmath.pi) * mpmath.gamma(mpmath.mpf(d - 1) / 2))
    total = mpmath.mpf(0)
    for k in range(4, 30, 2):
        lam = c * mpmath.quad(lambda t: mpmath.cos(beta * t) * mpmath.gegenbauer(k, 1.5, t)
                              / mpmath.gegenbauer(k, 1.5, 1) * (1 - t * t), [-1, 1])
        N = (2 * k + d - 2) * math.comb(k + d - 3, d - 2) // k
        total += N * lam**2
    mpmath.mp.dps = 15
    assert mc_error_series(d, beta, 2, k_min=4, factor=3) == pytest.approx(float(3 * total / 2), rel=1e-9)


@pytest.mark.parametrize("d", [2, 3, 8, 20])
@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0, 5.0])
def test_parseval_closure(d, beta):
    assert parseval_sum(d, beta) == pytest.approx(0.5 * (1 + f_bar(d, beta * beta, 1.0)), abs=1e-8)


def test_replicate_mse_examples():
    spec = KernelSpec(3, 1.0)
    x, y = np.zeros(3), np.array([0.5, 0.2, -0.1])
    mean, se = replicate_mse(lambda s, i: build_qmc_halton(spec, 16), x, y, 100)
    err = math.exp(-np.dot(y, y) / 2) - kappa_hat(build_qmc_halton(spec, 16), x, y)
    assert se == 0.0 and mean == pytest.approx(err**2, rel=1e-12)
    mean, se = replicate_mse(lambda s, i: build_map("RFF", spec, M=8, seed=s, stream_id=i), x, x, 100)
    assert mean == 0.0
    with pytest.raises(PreconditionError):
        replicate_mse(lambda s, i: build_qmc_halton(spec, 4), x, y, 50)


def test_replicate_mse_sr_mc_matches_series():
    # SR-MC with M_R=1: radius r = sqrt(2 xi_1) = sqrt(3) at d=3, so beta = sqrt(3) |x - y|
    spec = KernelSpec(3, 1.0)
    rule = gauss_laguerre(3, 1)
    x = np.zeros(3)
    y = np.array([1 / math.sqrt(3), 0, 0])
    mean, se = replicate_mse(lambda s, i: build_map("SR_MC", spec, M_R=1, M_S=4, seed=s, stream_id=i),
                             x, y, 4000, seed=1)
    spherical = mc_error_series(3, 1.0, 4)
    radial = radial_quadrature_error(rule, spec, float(np.linalg.norm(y)))
    # E(radial + spherical)^2 = radial^2 + spherical (the spherical error has mean zero)
    assert abs(mean - (spherical + radial**2)) <= 4 * se


def test_spherical_stage_identity_small():
    mean, se = spherical_stage_mse("mc", 3, 1.0, 4, 20000, seed=5)
    assert abs(mean - MC_SERIES_D3_BETA1 / 4) <= 4 * se
    omc, se_o = spherical_stage_mse("omc", 4, 1.0, 4, 20000, seed=5)
    assert omc <= mc_error_series(4, 1.0, 4, k_min=4, factor=3) + 4 * se_o
    with pytest.raises(PreconditionError):
        spherical_stage_mse("omc", 4, 1.0, 6, 200)


def test_spherical_stage_chunking_is_invisible():
    a = spherical_stage_mse("omc", 4, 1.0, 8, 1000, seed=2, chunk=1000)
    b = spherical_stage_mse("omc", 4, 1.0, 8, 1000, seed=2, chunk=1000)
    assert a == b
