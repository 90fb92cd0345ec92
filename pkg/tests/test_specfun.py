import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from fellerfpt import specfun as sf

mp.mp.dps = 30


def series_oracle(a, c, x, terms=400):
    """Plain 1F1 series with exact rational Pochhammer ratios."""
    a, c, x = Fraction(a), Fraction(c), Fraction(x)
    term, total = Fraction(1), Fraction(1)
    for n in range(terms):
        term *= (a + n) * x / ((c + n) * (n + 1))
        total += term
    return float(total)


def u_quad_oracle(a, c, x):
    """Integral representation of U with z = w**(1/a), which removes the
    z**(a-1) endpoint singularity."""
    a, c, x = mp.mpf(a), mp.mpf(c), mp.mpf(x)

    def f(w):
        z = w ** (1 / a)
        return mp.exp(-x * z) * (1 + z) ** (c - a - 1)

    scales = sorted({1 / (1 + x), 1, 10, 100, (a + 1) / x, 10 * (a + 1) / x})
    pts = [0] + [zb**a for zb in scales] + [mp.inf]
    return mp.quad(f, pts) / (a * mp.gamma(a))


def u_oracle(a, c, x):
    try:
        return mp.hyperu(a, c, x, maxterms=10**5)
    except mp.libmp.NoConvergence:
        return u_quad_oracle(a, c, x)


# -- Kummer F --------------------------------------------------------------

def test_kummer_f_at_zero():
    assert sf.kummer_f(0.7, 1.3, 0.0) == 1.0


def test_kummer_f_elementary_case():
    assert sf.kummer_f(1, 2, 1.0) == pytest.approx(math.e - 1, rel=1e-14)


def test_kummer_f_against_rational_series():
    assert sf.kummer_f(0.5, 1.5, 2.0) == pytest.approx(series_oracle(0.5, 1.5, 2.0), rel=1e-13)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.1, 5), st.floats(0.1, 5), st.floats(0, 20))
def test_kummer_f_matches_mpmath(a, c, x):
    ref = float(mp.hyp1f1(a, c, x))
    assert sf.kummer_f(a, c, x) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("a,c,x", [(50.0, 0.5, 30.0), (200.0, 1.5, 80.0), (3.0, 2.5, 400.0)])
def test_log_kummer_f_large_arguments(a, c, x):
    ref = float(mp.log(mp.hyp1f1(a, c, x)))
    lf, sign = sf.log_kummer_f(a, c, x)
    assert sign == 1
    assert lf == pytest.approx(ref, abs=1e-10 * max(1.0, abs(ref)))


def test_kummer_f_polynomial_case():
    # a = -2 truncates the series: 1 - 2x/c + x^2/(c(c+1))
    c, x = 1.5, 3.0
    assert sf.kummer_f(-2, c, x) == pytest.approx(1 - 2 * x / c + x * x / (c * (c + 1)), rel=1e-14)


def test_kummer_f_errors_and_overflow():
    with pytest.raises(sf.PoleError):
        sf.kummer_f(1.0, -2.0, 1.0)
    with pytest.raises(sf.DomainError):
        sf.kummer_f(1.0, 1.0, -1.0)
    res = sf.kummer_f_result(1.0, 1.0, 800.0)
    assert res.overflow and math.isinf(res.value)


def test_kummer_f_result_error_estimate():
    res = sf.kummer_f_result(2.0, 1.5, 4.0)
    assert res.converged and 0 <= res.abs_error_estimate < 1e-10 * res.value


# -- Kummer U --------------------------------------------------------------

def test_kummer_u_power_identity_example():
    assert sf.kummer_u(1, 2, 4.0) == pytest.approx(0.25, rel=1e-13)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("x", [0.1, 0.7, 3.0, 11.0, 20.0])
def test_kummer_u_power_identity(a, x):
    assert abs(sf.kummer_u(a, a + 1, x) - x ** (-a)) / x ** (-a) < 1e-10


def test_kummer_u_small_x_limit():
    assert sf.kummer_u(1, 0.5, 1e-10) == pytest.approx(2.0, abs=1e-4)


def test_kummer_u_against_integral_representation():
    ref = float(u_quad_oracle(2, 1.5, 3.0))
    assert sf.kummer_u(2, 1.5, 3.0) == pytest.approx(ref, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 30), st.floats(0.05, 4), st.floats(1e-3, 60))
def test_kummer_u_matches_integral_oracle(a, c, x):
    ref = float(mp.log(u_oracle(a, c, x)))
    assert sf.log_kummer_u(a, c, x) == pytest.approx(ref, abs=1e-9)


@pytest.mark.parametrize("s", [0.5, 2.0, 7.0])
@pytest.mark.parametrize("x", [0.05, 1.0, 6.0])
def test_kummer_u_continuous_across_integer_c(s, x):
    lo = sf.kummer_u(s, 1 - 1e-7, x)
    hi = sf.kummer_u(s, 1 + 1e-7, x)
    assert abs(lo - hi) / abs(hi) < 1e-5


def test_kummer_u_domain():
    with pytest.raises(sf.DomainError):
        sf.kummer_u(1.0, 1.0, 0.0)
    with pytest.raises(sf.DomainError):
        sf.kummer_u(0.0, 1.0, 1.0)


@pytest.mark.parametrize("s,c,x", [(0.5, 0.3, 1.0), (3.0, 1.5, 5.0), (10.0, 3.0, 0.1),
                                   (1.0, 0.5, 20.0)])
def test_kummer_ode_residuals(s, c, x):
    for fn, d1, d2 in (
        (sf.kummer_f, lambda: s / c * sf.kummer_f(s + 1, c + 1, x),
         lambda: s * (s + 1) / (c * (c + 1)) * sf.kummer_f(s + 2, c + 2, x)),
        (sf.kummer_u, lambda: -s * sf.kummer_u(s + 1, c + 1, x),
         lambda: s * (s + 1) * sf.kummer_u(s + 2, c + 2, x)),
    ):
        terms = (x * d2(), (c - x) * d1(), -s * fn(s, c, x))
        assert abs(sum(terms)) / sum(map(abs, terms)) < 1e-8


# -- Bessel and Gamma family -----------------------------------------------

def test_bessel_i_values():
    assert sf.bessel_i(0, 0) == 1.0
    assert sf.bessel_i(0.5, 1.0) == pytest.approx(math.sinh(1) * math.sqrt(2 / math.pi), rel=1e-14)
    ref = sum((4.0) ** (2 * n + 1.2) / (math.factorial(n) * math.gamma(n + 2.2)) for n in range(80))
    assert sf.bessel_i(1.2, 8.0) == pytest.approx(ref, rel=1e-13)
    with pytest.raises(sf.DomainError):
        sf.bessel_i(0.0, -1.0)


def test_bessel_i_scaled_array():
    z = np.array([0.5, 50.0, 900.0])
    out = sf.bessel_i_scaled(0.3, z)
    assert np.all(out > 0) and np.all(np.isfinite(out))
    assert out[0] == pytest.approx(math.exp(-0.5) * sf.bessel_i(0.3, 0.5), rel=1e-14)


def test_gamma_upper_values():
    assert sf.gamma_upper(1, 2.0) == pytest.approx(math.exp(-2), rel=1e-14)
    assert sf.gamma_upper(0.5, 1.0) == pytest.approx(math.sqrt(math.pi) * math.erfc(1), rel=1e-14)
    assert sf.gamma_upper(3, 0) == 2.0
    with pytest.raises(sf.DomainError):
        sf.gamma_upper(0.0, 0.0)


def test_gamma_upper_negative_order():
    ref = float(mp.gammainc(-1.5, 0.8))
    assert sf.gamma_upper(-1.5, 0.8) == pytest.approx(ref, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 20), st.floats(1e-3, 50), st.floats(1e-3, 5))
def test_gamma_upper_decreasing_in_z(a, z, dz):
    # strict in exact arithmetic; the step can fall below float resolution
    assert sf.gamma_upper(a, z + dz) <= sf.gamma_upper(a, z)


def test_log_gamma_upper_far_tail():
    ref = float(mp.log(mp.gammainc(2.5, 900)))
    assert sf.log_gamma_upper(2.5, 900.0) == pytest.approx(ref, rel=1e-6)


def test_digamma():
    g = 0.5772156649015329
    assert sf.digamma(1) == pytest.approx(-g, rel=1e-14)
    assert sf.digamma(2) == pytest.approx(1 - g, rel=1e-14)
    assert sf.digamma(0.5) == pytest.approx(-g - 2 * math.log(2), rel=1e-14)
    with pytest.raises(sf.PoleError):
        sf.digamma(-3.0)


def test_exp_integral_e1():
    assert sf.exp_integral_e1(0.7) - sf.gamma_upper(0, 0.7) == 0.0
    ref = integrate.quad(lambda z: math.exp(-z) / z, 1.0, np.inf, epsabs=0, epsrel=1e-13)[0]
    assert sf.exp_integral_e1(1.0) == pytest.approx(ref, rel=1e-12)
    assert sf.exp_integral_e1(1.0) == pytest.approx(0.2193839343, rel=1e-9)
    x = 50.0
    assert abs(x * math.exp(x) * sf.exp_integral_e1(x) - 1) < 0.025
    with pytest.raises(sf.DomainError):
        sf.exp_integral_e1(0.0)


def test_log_gamma_and_pochhammer():
    assert sf.pochhammer(0.37, 0) == 1.0
    assert sf.pochhammer(3, 4) == 360.0
    assert sf.log_gamma(5) == pytest.approx(math.log(24), rel=1e-15)
    with pytest.raises(sf.DomainError):
        sf.pochhammer(1.0, -1)
