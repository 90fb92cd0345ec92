import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from fellerfpt.process import (
    DimensionlessModel,
    FellerParams,
    OriginRegime,
    classify_origin,
    integrate_against_pdf,
    log_transition_pdf,
    pdf_laplace_x,
    stationary_pdf,
    to_dimensionless,
    transition_moments,
    transition_pdf,
)
from fellerfpt.specfun import DomainError


def bessel_series_pdf(x, t, x0, theta, terms=200):
    """Transition density as the Poisson mixture of Gamma densities."""
    a = -math.expm1(-t)
    lam = x0 * math.exp(-t) / a
    total = 0.0
    for n in range(terms):
        total += math.exp(
            -lam + n * math.log(lam) - math.lgamma(n + 1)
            + (theta + n - 1) * math.log(x) - x / a - (theta + n) * math.log(a)
            - math.lgamma(theta + n))
    return total


# -- parameters and scaling ------------------------------------------------

def test_to_dimensionless_examples():
    m = to_dimensionless(FellerParams(1.0, 1.0, math.sqrt(2.0)))
    assert m.theta == pytest.approx(1.0, rel=1e-15)
    m = to_dimensionless(FellerParams(2.0, 0.5, 1.0))
    assert (m.theta, m.time_scale, m.state_scale) == (1.0, 2.0, 4.0)
    m = to_dimensionless(FellerParams(1.0, 0.25, 1.0))
    assert m.theta == 0.5 and classify_origin(m).accessible


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), st.floats(1e-2, 1e2))
def test_params_round_trip(alpha, beta, k):
    p = FellerParams(alpha, beta, k)
    back = DimensionlessModel.from_params(p).to_params()
    for u, v in zip((back.alpha, back.beta, back.k), (alpha, beta, k)):
        assert u == pytest.approx(v, rel=1e-14)


def test_invalid_params():
    with pytest.raises(DomainError):
        FellerParams(1.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        DimensionlessModel(-1.0)


def test_unit_conversions():
    m = DimensionlessModel.from_params(FellerParams(2.0, 0.5, 1.0))
    assert m.to_state(1.5) == 6.0 and m.to_time(3.0) == 6.0


@pytest.mark.parametrize("theta,regime,acc", [
    (0.5, OriginRegime.THETA_BELOW_ONE, True),
    (1.0, OriginRegime.THETA_EQUAL_ONE, True),
    (1.7, OriginRegime.THETA_ABOVE_ONE, False),
])
def test_classify_origin(theta, regime, acc):
    bc = classify_origin(DimensionlessModel(theta))
    assert bc.accessible is acc and bc.regime is regime


# -- transition density ----------------------------------------------------

def test_pdf_at_origin_theta_one():
    t, x0 = 1.0, 1.0
    a = 1 - math.exp(-t)
    expected = math.exp(-x0 * math.exp(-t) / a) / a
    assert transition_pdf(0.0, t, x0, DimensionlessModel(1.0)) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(0.883997, rel=1e-6)


def test_pdf_at_origin_other_regimes():
    assert transition_pdf(0.0, 1.0, 1.0, DimensionlessModel(0.5)) == math.inf
    assert transition_pdf(0.0, 1.0, 1.0, DimensionlessModel(1.5)) == 0.0


@pytest.mark.parametrize("theta", [0.3, 1.0, 2.5, 7.0])
@pytest.mark.parametrize("t", [0.01, 0.5, 3.0])
def test_pdf_matches_poisson_gamma_series(theta, t):
    x0 = 1.3
    for x in (0.05, 0.8, 2.0, 4.5):
        ref = bessel_series_pdf(x, t, x0, theta, terms=600)
        assert transition_pdf(x, t, x0, DimensionlessModel(theta)) == pytest.approx(ref, rel=1e-11)


def test_pdf_no_overflow_small_t():
    m = DimensionlessModel(1.5)
    lp = log_transition_pdf(np.array([0.999, 1.0, 1.001, 3.0]), 1e-6, 1.0, m)
    assert np.all(np.isfinite(lp[:3])) and lp[3] < -1e5


def test_pdf_domain():
    m = DimensionlessModel(1.5)
    for args in ((1.0, 0.0, 1.0), (1.0, 1.0, 0.0), (-1.0, 1.0, 1.0)):
        with pytest.raises(DomainError):
            transition_pdf(*args, m)


def test_normalisation_example():
    v, err = integrate_against_pdf(lambda x: 1.0, 0.7, 2.0, DimensionlessModel(1.5))
    assert abs(v - 1) < 1e-10


@pytest.mark.parametrize("theta", [0.5, 1.0, 1.5, 3.0])
@pytest.mark.parametrize("t", [0.1, 1.0, 5.0])
@pytest.mark.parametrize("x0", [0.5, 2.0])
def test_normalisation_and_x_laplace(theta, t, x0):
    m = DimensionlessModel(theta)
    assert abs(integrate_against_pdf(lambda x: 1.0, t, x0, m)[0] - 1) < 1e-6
    for sigma in (0.1, 1.0, 5.0):
        v, _ = integrate_against_pdf(lambda x: math.exp(-sigma * x), t, x0, m)
        assert abs(v - pdf_laplace_x(sigma, t, x0, m)) < 1e-6


@pytest.mark.parametrize("theta,t,x0", [(0.5, 0.3, 1.0), (2.0, 2.0, 0.4), (1.0, 1.0, 3.0)])
def test_moments(theta, t, x0):
    m = DimensionlessModel(theta)
    mean, var = transition_moments(t, x0, m)
    m1, _ = integrate_against_pdf(lambda x: x, t, x0, m)
    m2, _ = integrate_against_pdf(lambda x: x * x, t, x0, m)
    assert m1 == pytest.approx(mean, rel=1e-9)
    assert m2 - m1**2 == pytest.approx(var, rel=1e-8)


def test_chapman_kolmogorov():
    m = DimensionlessModel(1.5)
    x0, t1, t2 = 1.0, 0.4, 0.7
    for x in (0.3, 1.2, 2.5):
        v, _ = integrate_against_pdf(lambda y: transition_pdf(x, t2, y, m) if y > 0 else
                                     transition_pdf(x, t2, 1e-300, m), t1, x0, m)
        assert v == pytest.approx(transition_pdf(x, t1 + t2, x0, m), abs=1e-5)


def test_zero_flux_at_origin():
    m = DimensionlessModel(2.5)
    t, x0 = 0.8, 1.0
    xs = np.array([1e-3, 2e-3, 5e-3, 1e-2])
    h = 1e-6

    def flux(x):
        p = transition_pdf(x, t, x0, m)
        dxp = ((x + h) * transition_pdf(x + h, t, x0, m)
               - (x - h) * transition_pdf(x - h, t, x0, m)) / (2 * h)
        return (x - m.theta) * p + dxp

    fl = np.array([flux(x) for x in xs])
    # extrapolate to 0 with a low-order fit
    intercept = np.polyval(np.polyfit(xs, fl, 2), 0.0)
    assert abs(intercept) < 1e-4


def test_stationarity_example():
    m = DimensionlessModel(2.0)
    x = np.array([0.5, 1.0, 3.0])
    assert np.max(np.abs(transition_pdf(x, 40.0, 1.0, m) - stationary_pdf(x, m))) < 1e-8


@pytest.mark.parametrize("theta", [0.5, 1.5, 3.0])
def test_stationarity_sup_norm(theta):
    m = DimensionlessModel(theta)
    x = np.linspace(1e-3, 40, 2000)
    assert np.max(np.abs(transition_pdf(x, 40.0, 1.3, m) - stationary_pdf(x, m))) < 1e-8


# -- stationary law and x-Laplace transform ----------------------------------

def test_stationary_pdf_examples():
    m = DimensionlessModel(1.0)
    assert stationary_pdf(0.0, m) == 1.0
    assert stationary_pdf(2.0, m) == pytest.approx(math.exp(-2), rel=1e-15)
    m = DimensionlessModel(2.5)
    mean = integrate.quad(lambda x: x * stationary_pdf(x, m), 0, np.inf, epsrel=1e-13)[0]
    assert abs(mean - 2.5) < 1e-10
    m = DimensionlessModel(3.0)
    xs = np.linspace(0.5, 4, 3501)
    assert xs[np.argmax(stationary_pdf(xs, m))] == pytest.approx(2.0, abs=1e-3)
    assert stationary_pdf(0.0, DimensionlessModel(0.5)) == math.inf


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 5), st.floats(1e-3, 20), st.floats(1e-3, 10))
def test_pdf_laplace_at_zero_is_one(theta, t, x0):
    assert pdf_laplace_x(0.0, t, x0, DimensionlessModel(theta)) == 1.0


def test_pdf_laplace_examples():
    assert abs(pdf_laplace_x(1.0, 40.0, 1.0, DimensionlessModel(2.0)) - 0.25) < 1e-15
    m = DimensionlessModel(0.5)
    v, _ = integrate_against_pdf(lambda x: math.exp(-2 * x), 1.0, 1.0, m)
    assert abs(v - pdf_laplace_x(2.0, 1.0, 1.0, m)) < 1e-8


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 4), st.floats(0.05, 6), st.floats(0.05, 5))
def test_normalisation_property(theta, t, x0):
    v, _ = integrate_against_pdf(lambda x: 1.0, t, x0, DimensionlessModel(theta))
    assert abs(v - 1) < 1e-8
