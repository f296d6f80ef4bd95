import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.special import roots_gegenbauer

from zonalpd import gegenbauer as geg
from zonalpd.errors import DomainError, ParameterError

X_GRID = np.linspace(-1.0, 1.0, 41)


def series_gegenbauer(lam, n, x):
    # explicit finite sum in 30-digit arithmetic, independent of the recurrence
    with mpmath.workdps(30):
        lam, x = mpmath.mpf(lam), mpmath.mpf(x)
        total = mpmath.fsum((-1) ** k * mpmath.gamma(n - k + lam)
                            / (mpmath.gamma(lam) * mpmath.factorial(k) * mpmath.factorial(n - 2 * k))
                            * (2 * x) ** (n - 2 * k) for k in range(n // 2 + 1))
        return float(total)


# ---- eval


def test_degree_zero_is_one():
    assert geg.eval_gegenbauer(2, 0, 0.37) == 1.0


def test_lambda_one_is_chebyshev_second_kind():
    theta = 0.8
    assert geg.eval_gegenbauer(1, 3, math.cos(theta)) == pytest.approx(math.sin(4 * theta) / math.sin(theta), rel=1e-13)


def test_against_series_definition():
    # mpmath series oracle at 40 digits: -8.71875 exactly
    assert geg.eval_gegenbauer(3, 7, 0.25) == pytest.approx(-8.71875, rel=1e-13)
    assert series_gegenbauer(3, 7, 0.25) == pytest.approx(-8.71875, rel=1e-13)


@pytest.mark.parametrize("lam", [0.5, 1, 1.5, 2, 3, 4.25])
@pytest.mark.parametrize("n", [1, 2, 5, 9, 14])
def test_recurrence_matches_series(lam, n):
    x = np.linspace(-1, 1, 13)
    ref = np.array([series_gegenbauer(lam, n, xi) for xi in x])
    scale = geg.value_at_one(lam, n)
    assert np.max(np.abs(geg.eval_gegenbauer(lam, n, x) - ref)) <= 1e-12 * scale


def test_domain_error_outside_interval():
    with pytest.raises(DomainError):
        geg.eval_gegenbauer(2, 3, 1.0 + 1e-9)
    geg.eval_gegenbauer(2, 3, 1.0 + 1e-13)


def test_parameter_errors():
    with pytest.raises(ParameterError):
        geg.eval_gegenbauer(0.0, 3, 0.1)
    with pytest.raises(ParameterError):
        geg.eval_gegenbauer(1.0, -1, 0.1)
    with pytest.raises(ParameterError):
        geg.GegenbauerParam(1.0, 2.5)


def test_param_object_delegates():
    p = geg.GegenbauerParam(2, 4)
    assert p(0.3) == geg.eval_gegenbauer(2, 4, 0.3)
    assert p.value_at_one() == 35
    assert p.norm_h() == geg.norm_h(2, 4)


def test_table_matches_single_evaluations():
    tab = geg.gegenbauer_table(1.5, 20, X_GRID)
    for n in (0, 1, 7, 20):
        np.testing.assert_allclose(tab[n], geg.eval_gegenbauer(1.5, n, X_GRID), rtol=0, atol=1e-12)


@pytest.mark.parametrize("lam", [0.5, 1, 2, 3, 4])
def test_parity(lam):
    for n in range(0, 201, 7):
        plus = geg.eval_gegenbauer(lam, n, X_GRID)
        minus = geg.eval_gegenbauer(lam, n, -X_GRID)
        scale = geg.value_at_one(lam, n)
        assert np.max(np.abs(minus - (-1) ** n * plus)) <= 1e-11 * scale


@pytest.mark.parametrize("lam", [1, 2, 3, 4])
def test_recurrence_residual(lam):
    tab = geg.gegenbauer_table(lam, 201, X_GRID)
    for n in range(1, 200):
        res = (n + 1) * tab[n + 1] - 2 * (n + lam) * X_GRID * tab[n] + (n + 2 * lam - 1) * tab[n - 1]
        assert np.max(np.abs(res)) <= 1e-10 * (n + 1) * geg.value_at_one(lam, n + 1)


# ---- value at one and norms


def test_value_at_one_examples():
    assert geg.value_at_one(1, 5) == 6
    assert geg.value_at_one(3, 0) == 1
    assert geg.value_at_one(2, 4) == math.comb(7, 4) == 35


@pytest.mark.parametrize("lam", [0.5, 1.5, 2.25])
def test_value_at_one_matches_evaluation(lam):
    for n in (0, 3, 10):
        assert geg.value_at_one(lam, n) == pytest.approx(geg.eval_gegenbauer(lam, n, 1.0), rel=1e-12)


def test_norm_examples():
    # quadrature of the weight (1 - x^2)^{1/2} over [-1, 1]
    assert geg.norm_h(1, 0) == pytest.approx(math.pi / 2, rel=1e-15)
    # 40-digit quadrature oracles
    assert geg.norm_h(1, 3) == pytest.approx(1.5707963267948966192, rel=1e-10)
    assert geg.norm_h(2, 2) == pytest.approx(5.8904862254808623221, rel=1e-10)


@pytest.mark.parametrize("lam,n", [(1, 3), (2, 2), (3, 5), (1.5, 4)])
def test_norm_against_quadrature(lam, n):
    val, _ = quad(lambda th: geg.eval_gegenbauer(lam, n, math.cos(th)) ** 2 * math.sin(th) ** (2 * lam),
                  0, math.pi, epsabs=0, epsrel=1e-13, limit=200)
    assert geg.norm_h(lam, n) == pytest.approx(val, rel=1e-10)


def test_norm_large_degree_is_finite():
    h = geg.norm_h(3, 5000)
    assert math.isfinite(h) and h > 0


@pytest.mark.parametrize("lam", [1, 2, 3])
def test_orthogonality(lam):
    theta, weights = np.polynomial.legendre.leggauss(80)
    theta = 0.5 * math.pi * (theta + 1.0)
    weights = 0.5 * math.pi * weights * np.sin(theta) ** (2 * lam)
    tab = geg.gegenbauer_table(lam, 30, np.cos(theta))
    gram = (tab * weights) @ tab.T
    h = np.array([geg.norm_h(lam, n) for n in range(31)])
    off = gram - np.diag(np.diag(gram))
    assert np.all(np.abs(off) < 1e-9 * np.sqrt(np.outer(h, h)))
    np.testing.assert_allclose(np.diag(gram), h, rtol=1e-11)


# ---- cosine expansions


def test_cosine_coeffs_small_case():
    exp = geg.cosine_coeffs(1, 1)
    assert exp.coeffs == pytest.approx((0.5, -0.5), abs=1e-15)
    np.testing.assert_array_equal(exp.frequencies(), [1, 3])


def test_cosine_coeffs_reproduce_sin4():
    theta = np.linspace(0, math.pi, 100)
    assert np.max(np.abs(geg.cosine_coeffs(2, 0)(theta) - np.sin(theta) ** 4)) <= 1e-12


@given(mu=st.integers(1, 4), n=st.integers(0, 300))
@settings(max_examples=60, deadline=None)
def test_cosine_coeffs_terminate_and_vanish_at_zero(mu, n):
    exact = geg.cosine_coeffs_exact(mu, n)
    assert len(exact) == mu + 1
    if n > 0:
        assert sum(exact) == 0


def test_weighted_eval_examples():
    assert geg.weighted_eval(1, 2, math.pi / 2) == pytest.approx(-1.0, abs=1e-14)
    assert geg.weighted_eval(2, 0, 0.0) == pytest.approx(0.0, abs=1e-15)
    direct = geg.eval_gegenbauer(3, 10, math.cos(1.1)) * math.sin(1.1) ** 6
    assert geg.weighted_eval(3, 10, 1.1) == pytest.approx(direct, rel=1e-10)


@pytest.mark.parametrize("mu", [1, 2, 3])
def test_weighted_eval_matches_product(mu):
    theta = np.linspace(0, math.pi, 97)
    for n in list(range(0, 40)) + [100, 257, 500]:
        direct = geg.eval_gegenbauer(mu, n, np.cos(theta)) * np.sin(theta) ** (2 * mu)
        diff = np.max(np.abs(geg.weighted_eval(mu, n, theta) - direct))
        assert diff <= 1e-10 * geg.value_at_one(mu, n)


# ---- connection coefficients


def test_connection_terminating_case_is_exact():
    conn = geg.connection_coeffs(2, 1, 1, kmax=1)
    theta = np.linspace(0, math.pi, 101)
    target = np.sin(theta) ** 4 * geg.eval_gegenbauer(2, 1, np.cos(theta))
    assert np.max(np.abs(conn.reconstruct(theta) - target)) <= 1e-12
    longer = geg.connection_coeffs(2, 1, 1, kmax=4)
    assert longer.coeffs[2:] == (0.0, 0.0, 0.0)


def test_connection_identity_parameter():
    conn = geg.connection_coeffs(2.5, 2.5, 3, kmax=3)
    assert conn.coeffs[0] == pytest.approx(1.0, rel=1e-14)
    assert conn.coeffs[1:] == (0.0, 0.0, 0.0)


def test_connection_against_projection():
    # projection oracle at 40 digits: c_0 = 1.05, c_1 = -0.3
    conn = geg.connection_coeffs(3, 2, 2, kmax=1)
    assert conn.coeffs == pytest.approx((1.05, -0.3), rel=1e-12)


def test_connection_projection_live():
    mu, lam, n = 2.5, 1.5, 3
    conn = geg.connection_coeffs(mu, lam, n, kmax=3)
    for k in range(4):
        m = n + 2 * k
        val, _ = quad(lambda th: math.sin(th) ** (2 * mu) * geg.eval_gegenbauer(mu, n, math.cos(th))
                      * geg.eval_gegenbauer(lam, m, math.cos(th)), 0, math.pi, epsabs=1e-13, limit=200)
        assert conn.coeffs[k] == pytest.approx(val / geg.norm_h(lam, m), abs=1e-11)


def test_connection_partial_sums_improve():
    theta = np.linspace(0.05, math.pi - 0.05, 60)
    target = np.sin(theta) ** 3 * geg.eval_gegenbauer(1.5, 2, np.cos(theta))
    errs = [np.max(np.abs(geg.connection_coeffs(1.5, 1.0, 2, k).reconstruct(theta) - target)) for k in (2, 8, 32)]
    assert errs[0] > errs[1] > errs[2]


def test_connection_rejects_small_mu():
    with pytest.raises(ParameterError):
        geg.connection_coeffs(0.9, 3.0, 2, 2)


# ---- zero bounds


def test_raise_parameter_identity():
    x = np.linspace(-1, 1, 51)
    for lam in (0.5, 1, 2, 3):
        for k in range(0, 40):
            lhs, rhs = geg.raise_parameter_sides(lam, k, x)
            scale = geg.value_at_one(lam, k + 2)
            assert np.max(np.abs(lhs - rhs)) <= 1e-10 * scale


@pytest.mark.parametrize("lam,n,method", [(2, 4, "elbert"), (3, 5, "area"), (1, 10, "elbert"),
                                          (3, 14, "area"), (2, 30, "area"), (3, 50, "elbert")])
def test_zero_bound_dominates_largest_zero(lam, n, method):
    zeros, _ = roots_gegenbauer(n, lam)
    assert geg.largest_zero_bound(lam, n, method) >= zeros.max()


def test_zero_bound_degree_one():
    assert geg.largest_zero_bound(2, 1, "elbert") >= 0.0
    with pytest.raises(ParameterError):
        geg.largest_zero_bound(2, 0)
    with pytest.raises(ParameterError):
        geg.largest_zero_bound(2, 3, "other")
