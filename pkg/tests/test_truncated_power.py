import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zonalpd import gegenbauer as geg
from zonalpd import truncated_power as tp
from zonalpd.errors import ParameterError, QuadratureError
from zonalpd.quadrature import integrate

# values below come from 40-digit mpmath quadrature of the defining integral
F_ORACLE = {
    (1, 2, 0, math.pi / 2): 0.25326501580752209885,
    (1, 2, 4, 2.0): 0.051501587961322460779,
    (3, 4, 2, 1.3): 0.046116414457763918291,
    (2, 3, 1, 1.0): 0.0097428455495556428637,
    (1, 2, 1, math.pi): 2.7925268031909273231,
    (2, 3, 64, 1.0): 4.9142007749436863283e-05,
}


@pytest.mark.parametrize("key", sorted(F_ORACLE))
def test_quadrature_matches_high_precision(key):
    lam, delta, n, t = key
    assert tp.f_quadrature(lam, delta, n, t) == pytest.approx(F_ORACLE[key], rel=1e-11, abs=1e-14)


@pytest.mark.parametrize("key", sorted(F_ORACLE))
def test_exact_form_matches_high_precision(key):
    lam, delta, n, t = key
    assert tp.f_exact(lam, delta, n, t) == pytest.approx(F_ORACLE[key], rel=1e-12, abs=1e-16)


def test_mpmath_oracle_live():
    lam, delta, n, t = 2, 2.5, 3, 1.7
    with mpmath.workdps(30):
        ref = mpmath.quad(lambda th: (t - th) ** delta * mpmath.gegenbauer(n, lam, mpmath.cos(th))
                          * mpmath.sin(th) ** (2 * lam), [0, t / 2, t])
    assert tp.f_quadrature(lam, delta, n, t) == pytest.approx(float(ref), rel=1e-11)
    assert tp.f_eval(lam, delta, n, t) == pytest.approx(float(ref), rel=1e-11)


def test_small_cap_limit_is_zero():
    for lam, delta, n in [(1, 2, 0), (2, 1.5, 7), (3, 4, 20)]:
        assert abs(tp.f_quadrature(lam, delta, n, 1e-8)) < 1e-30


def test_spec_validation():
    with pytest.raises(ParameterError):
        tp.TruncatedPowerSpec(1.0, 2.0, 3, 4.0)
    with pytest.raises(ParameterError):
        tp.TruncatedPowerSpec(1.0, -1.0, 3, 1.0)
    with pytest.raises(ParameterError):
        tp.f_closed(0, 3, 1.0)


def test_closed_form_lambda2_degree1_coefficients():
    e = (4, -6, 2)
    assert tp.prototype_coeffs(2, 1) == e
    for t in (0.3, 1.0, 2.0, 3.0):
        total = sum(ek / (1 + 2 * k) ** 4 * (math.cos((1 + 2 * k) * t) - (1 - (1 + 2 * k) ** 2 * t * t / 2))
                    for k, ek in enumerate(e))
        assert 4.0 / 3.0 * tp.f_closed(2, 1, t) == pytest.approx(total, rel=1e-11)


@pytest.mark.parametrize("lam", [2, 3])
def test_bracket_forms_match_exact_form(lam):
    t = np.linspace(0.2, math.pi, 40)
    for n in (1, 2, 5, 11):
        np.testing.assert_allclose(tp.f_prototype(lam, n, t), tp.f_closed(lam, n, t), rtol=1e-9, atol=1e-13)


def test_lambda1_forms_agree():
    t = np.linspace(0.01, math.pi, 50)
    for n in (1, 2, 7, 30):
        ref = tp.f_closed(1, n, t)
        np.testing.assert_allclose(tp.f1_via_i(n, t), ref, rtol=1e-10, atol=1e-15)
        np.testing.assert_allclose(tp.f1_d_form(n, t), ref, rtol=1e-8, atol=1e-13)
    # I(pi, 1) - I(pi, 3)
    assert tp.f_closed(1, 1, math.pi) == pytest.approx(tp.i_kernel(math.pi, 1) - tp.i_kernel(math.pi, 3), rel=1e-14)


@pytest.mark.parametrize("lam", [1, 2, 3])
def test_closed_vs_quadrature(lam):
    t = np.linspace(math.pi / 64, math.pi, 64)
    for n in (0, 1, 4, 13, 29, 50):
        quad_vals = np.array([tp.f_quadrature(lam, lam + 1, n, ti) for ti in t])
        sup = tp.sup_norm_f(lam, n)
        assert np.max(np.abs(tp.f_closed(lam, n, t) - quad_vals)) <= 1e-9 * sup


def test_exact_rounding_bound_covers_error():
    # 30-digit quadrature of the cosine-expanded integrand (expansion checked separately)
    for lam, delta, n, t in [(1, 1, 300, 1.2635), (3, 4, 120, 0.7), (2, 3, 2, 0.001), (1, 1, 40, 3.0)]:
        coeffs = geg.cosine_coeffs_exact(lam, n)
        with mpmath.workdps(30):
            tm = mpmath.mpf(t)

            def integrand(th):
                return (tm - th) ** delta * mpmath.fsum(
                    mpmath.mpf(c.numerator) / c.denominator * mpmath.cos((n + 2 * k) * th)
                    for k, c in enumerate(coeffs))

            ref = mpmath.quad(integrand, mpmath.linspace(0, tm, 2 * n + 2))
        err = abs(tp.f_exact(lam, delta, n, t) - float(ref))
        assert err <= tp.f_exact_error_bound(lam, delta, n, t)


def test_lambda0_examples():
    assert tp.f_lambda0(2, math.pi) == pytest.approx(0.0, abs=1e-30)
    assert tp.f_lambda0(1, math.pi) > 0
    assert tp.f_lambda0(3, 1.0) == pytest.approx((1 - math.cos(3.0)) / 9, rel=1e-14)
    val = integrate(lambda th: (1.0 - th) * np.cos(3 * th), 0.0, 1.0).value
    assert tp.f_lambda0(3, 1.0) == pytest.approx(val, rel=1e-12)


def test_normalized_uses_shifted_exponent():
    for lam in (1, 2, 3):
        for n in (0, 3, 9):
            t = 1.4
            g = tp.g_normalized(lam, lam, n, t)
            assert geg.value_at_one(lam, n) * g == pytest.approx(tp.f_closed(lam, n, t), rel=1e-12)
    assert tp.g_normalized(2, 1.5, 0, 2.0) == pytest.approx(tp.f_eval(2, 2.5, 0, 2.0), rel=1e-12)
    # 40-digit oracle F_3^{1,3}(2) / C_3^1(1)
    assert tp.g_normalized(1, 2, 3, 2.0) == pytest.approx(0.10850475885943216906, rel=1e-10)


def test_real_delta_series_branch_matches_quadrature():
    for t in (0.05, 0.4, 1.5, 3.0):
        assert tp.f_eval(2, 1.7, 5, t) == pytest.approx(tp.f_eval(2, 1.7, 5, t, method="quadrature"), rel=1e-10)
    with pytest.raises(ParameterError):
        tp.f_eval(2, 1.7, 5, 1.0, method="exact")


# ---- h_delta


def h_series_mp(delta, u, order, terms=50):
    with mpmath.workdps(40):
        u = mpmath.mpf(u)
        total = mpmath.mpf(0)
        for j in range(terms):
            if 2 * j < order:
                continue
            total += ((-1) ** j * mpmath.factorial(2 * j) / mpmath.factorial(2 * j - order) * u ** (2 * j - order)
                      * mpmath.gamma(delta + 2) / mpmath.gamma(2 * j + delta + 3))
        return float(total)


def test_h_value_at_zero():
    for delta in (1, 2, 2.5, 3):
        assert tp.h_delta_eval(delta, 0.0) == pytest.approx(1 / (delta + 2), rel=1e-15)
        assert tp.h_delta_eval(delta, 1e-9) == pytest.approx(1 / (delta + 2), rel=1e-12)


def test_h3_second_derivative_expanded():
    u = 5.0
    ref = 24 * (u * (u * u - 20) - 10 * u * math.cos(u) - (u * u - 30) * math.sin(u)) / u ** 7
    assert tp.h_delta_eval(3, u, 2) == pytest.approx(ref, rel=1e-13)
    # 40-digit quadrature oracle
    assert tp.h_delta_eval(3, u, 2) == pytest.approx(0.0018500411454022638896, rel=1e-12)


def test_h_small_argument_series():
    ref = h_series_mp(2, 0.001, 1)
    assert ref == pytest.approx(-1.6666666071428581349e-05, rel=1e-15)
    assert tp.h_delta_eval(2, 0.001, 1) == pytest.approx(ref, rel=1e-14)
    naive = tp.h_delta_naive(2, 0.001, 1)
    assert abs(naive - ref) / abs(ref) > 1e-10


@pytest.mark.parametrize("delta", [1, 2, 3])
@pytest.mark.parametrize("order", [0, 1, 2, 3])
def test_h_against_series_oracle(delta, order):
    for u in (0.01, 0.7, 2.5, 3.9):
        ref = h_series_mp(delta, u, order, terms=60)
        assert tp.h_delta_eval(delta, u, order) == pytest.approx(ref, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("delta", [1, 2, 3, 1.5])
@pytest.mark.parametrize("order", [0, 1, 2, 3])
def test_h_series_switch_is_continuous(delta, order):
    s = tp.H_SERIES_SWITCH_U
    below = tp.h_delta_eval(delta, s, order)
    above = tp.h_delta_eval(delta, np.nextafter(s, 10.0), order)
    assert above == pytest.approx(below, rel=1e-10, abs=1e-14)


def test_generic_closed_form_matches_expanded_forms():
    u = np.linspace(4.5, 40, 30)
    for (delta, order), form in tp.LITERAL_H_FORMS.items():
        np.testing.assert_allclose(tp._h_generic(delta, u, order), form(u), rtol=1e-11, atol=1e-15)


@pytest.mark.parametrize("order", [0, 1, 2, 3])
def test_h_derivative_decay(order):
    u = np.geomspace(1.0, 1e4, 2000)
    for delta in range(max(order, 1), 4):
        scaled = np.abs(tp.h_delta_eval(delta, u, order)) * u ** (order + 2)
        assert np.all(np.isfinite(scaled))
        assert scaled[u >= 1e3].max() <= 1.05 * scaled[u < 1e3].max()


def test_h_first_derivative_fd():
    for delta in (1.5, 2, 3):
        u, step = 6.3, 1e-5
        fd = (tp.h_delta_eval(delta, u + step) - tp.h_delta_eval(delta, u - step)) / (2 * step)
        assert tp.h_delta_eval(delta, u, 1) == pytest.approx(fd, rel=1e-6, abs=1e-11)


# ---- identities


@pytest.mark.parametrize("lam,delta,n,t", [(1, 1, 2, 1.5), (2, 2, 0, math.pi), (3, 3, 5, 0.7)])
def test_recursion_examples(lam, delta, n, t):
    assert tp.recursion_check(lam, delta, n, t) < 1e-9


def test_recursion_sweep():
    worst = 0.0
    for lam in (1, 2, 3):
        for delta in (1, 2, 3, 1.5):
            for n in range(21):
                for t in (0.7, 2.0):
                    worst = max(worst, tp.recursion_check(lam, delta, n, t))
    assert worst < 1e-9


@pytest.mark.parametrize("j", [1, 2])
def test_inductive_integral_representation(j):
    for delta, n, t in [(2.0, 3, 1.2), (1.0, 0, 2.5), (3.0, 7, 0.4)]:
        lhs, rhs = tp.induct_main_sides(j, delta, n, t)
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-13)


def test_deeper_kernels_not_provided():
    with pytest.raises(ParameterError):
        tp.h_kernel(3, 1.0, 2, (1.0, 1.0, 1.0), 1.0)


@pytest.mark.parametrize("args", [(1, 1, 2, 3, 2.0), (2, 2, 3, 1, math.pi), (1, 0.5, 1.7, 4, 1.1)])
def test_fractional_reduction(args):
    assert tp.fractional_reduction_check(*args) < 1e-8


def test_fractional_reduction_equal_orders():
    assert tp.fractional_reduction_check(2, 2, 2, 3, 1.0) == 0.0


def test_sup_norm_examples():
    assert 0 < tp.sup_norm_f(1, 1) < math.inf
    t = np.linspace(0, math.pi, 256)
    quad_max = max(abs(tp.f_quadrature(2, 3, 64, ti)) for ti in t[1:])
    assert tp.sup_norm_f(2, 64, grid_size=256) == pytest.approx(quad_max, abs=1e-8)
    with pytest.raises(ParameterError):
        tp.sup_norm_f(1, 4, grid_size=100)


def test_sup_norm_decay_lambda1():
    ns = np.array([32, 64, 128, 256, 512])
    sup = [tp.sup_norm_f(1, n) for n in ns]
    slope = np.polyfit(np.log(ns), np.log(sup), 1)[0]
    assert slope == pytest.approx(-3, abs=0.15)


@given(lam=st.integers(1, 3), t=st.floats(1e-3, math.pi))
@settings(max_examples=50, deadline=None)
def test_degree_zero_positive(lam, t):
    assert tp.f_closed(lam, 0, t) > 0
    # quadrature is only accurate to about 1e-16 t^(delta+1) in absolute terms
    if t ** (2 * lam) > 1e-8:
        assert tp.f_quadrature(lam, lam + 0.5, 0, t) > 0


@pytest.mark.parametrize("lam", [1, 2, 3])
def test_small_cap_positivity(lam):
    for n in range(1, 101):
        bound = geg.largest_zero_bound(lam, n, "elbert")
        t_max = math.sqrt(max(0.0, 1 - bound * bound))
        t = np.linspace(t_max / 200, t_max, 200)
        assert np.all(tp.f_closed(lam, n, t) > 0)


def test_quadrature_reports_failure():
    with pytest.raises(QuadratureError) as info:
        integrate(lambda x: np.sign(x - 0.3), 0.0, 1.0, tol=1e-15, max_level=3)
    assert info.value.error_estimate > 0
    assert info.value.value == pytest.approx(0.4, abs=1e-2)


def test_t_outside_zero_pi_is_rejected():
    for bad in (4.0, -0.1):
        with pytest.raises(ParameterError):
            tp.f_closed(1, 2, bad)
        with pytest.raises(ParameterError):
            tp.f_eval(1, 2.5, 2, bad)
    with pytest.raises(ParameterError):
        tp.f_lambda0(3, np.array([1.0, 3.5]))
    assert tp.f_closed(2, 5, 0.0) == 0.0


def test_u_kernel_is_half_h1():
    u = np.array([0.01, 0.3, 2.0, 7.0, 40.0])
    np.testing.assert_allclose(tp.u_kernel(u), tp.h_delta_eval(1, u) / 2, rtol=1e-12)
