import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import special

from fellerfpt.invert import (
    DEFAULT_CONFIG,
    InversionError,
    _exact_weights,
    StehfestConfig,
    invert_at,
    invert_curve,
    invert_with_estimate,
    stehfest_weights,
)
from fellerfpt.laplace import ThresholdSpec, fpt_lt_below, fpt_lt_origin
from fellerfpt.process import DimensionlessModel
from fellerfpt.specfun import DomainError


def brute_weights(n):
    """Stehfest weights straight from the factorial formula, in exact integers."""
    h = n // 2
    out = []
    for k in range(1, n + 1):
        acc = Fraction(0)
        for j in range((k + 1) // 2, min(k, h) + 1):
            acc += Fraction(j**h * math.factorial(2 * j),
                            math.factorial(h - j) * math.factorial(j) * math.factorial(j - 1)
                            * math.factorial(k - j) * math.factorial(2 * j - k))
        out.append((-1) ** (k + h) * acc)
    return out


# -- weights ---------------------------------------------------------------

def test_weights_n4():
    assert stehfest_weights(4) == [-2.0, 26.0, -48.0, 24.0]


@pytest.mark.parametrize("n", [4, 8, 14, 20])
def test_weights_match_formula(n):
    assert stehfest_weights(n) == [float(v) for v in brute_weights(n)]


@pytest.mark.parametrize("n", [4, 10, 14, 18])
def test_weights_sum_to_zero(n):
    assert sum(_exact_weights(n)) == 0
    # the rounded weights keep the identity to within their own rounding
    w = stehfest_weights(n)
    assert abs(math.fsum(w)) <= 1e-15 * max(map(abs, w))


@pytest.mark.parametrize("n", [5, 2, 22, 0])
def test_weights_reject_bad_n(n):
    with pytest.raises(DomainError):
        stehfest_weights(n)


def test_config_cache_and_lower():
    cfg = StehfestConfig(16)
    assert cfg.weight_cache == tuple(stehfest_weights(16))
    assert cfg.lower().n_terms == 14
    assert DEFAULT_CONFIG.n_terms == 14


# -- single-point inversion --------------------------------------------------

def test_constant_transform():
    errs = [abs(invert_at(lambda s: 1 / s, t) - 1) for t in (0.01, 0.3, 1.0, 7.0, 100.0)]
    assert max(errs) < 1e-9


def test_exponential_pair():
    assert abs(invert_at(lambda s: 1 / (s + 1), 1.0) - math.exp(-1)) < 1e-8


def test_ramp_pair():
    assert abs(invert_at(lambda s: 1 / s**2, 2.5) - 2.5) < 1e-10


@pytest.mark.parametrize("f_hat,f,t", [
    (lambda s: 1 / (s + 1), lambda t: math.exp(-t), 1.0),
    (lambda s: 1 / s**2, lambda t: t, 2.5),
    (lambda s: 1 / math.sqrt(s), lambda t: 1 / math.sqrt(math.pi * t), 2.0),
])
def test_known_pairs_to_working_accuracy(f_hat, f, t):
    # accuracy reachable by 14-term Stehfest in double precision
    assert invert_at(f_hat, t) == pytest.approx(f(t), rel=1e-5)


def test_errors_carry_offending_s():
    def bad(s):
        if s > 2:
            raise ValueError("boom")
        return 1 / s

    with pytest.raises(InversionError) as exc:
        invert_at(bad, 1.0)
    assert exc.value.s == pytest.approx(3 * math.log(2))
    with pytest.raises(DomainError):
        invert_at(lambda s: 1 / s, 0.0)


@pytest.mark.parametrize("f_hat,f", [
    (lambda s: 1 / s, lambda t: 1.0),
    (lambda s: 1 / (s + 1), lambda t: math.exp(-t)),
    (lambda s: 1 / s**2, lambda t: t),
])
@pytest.mark.parametrize("t", [0.1, 0.5, 1.0, 2.5, 10.0])
def test_n_stability_estimate(f_hat, f, t):
    v, est = invert_with_estimate(f_hat, t)
    assert abs(v - f(t)) <= 10 * est


# -- curves ----------------------------------------------------------------

def test_curve_constant():
    c = invert_curve(lambda s: 1 / s, [0.5, 1, 2])
    assert np.allclose(c.values, 1.0, atol=1e-9)
    assert c.error_estimate.shape == (3,)


def test_curve_origin_matches_closed_form():
    m = DimensionlessModel(0.5)
    ts = [0.5, 1, 2, 5]
    c = invert_curve(lambda s: fpt_lt_origin(s, 1.0, m), ts, probability=True)
    exact = [special.gammaincc(0.5, math.exp(-t) / -math.expm1(-t)) for t in ts]
    assert np.max(np.abs(c.values - exact)) < 1e-4


def test_curve_below_is_a_cdf():
    m, th = DimensionlessModel(1.5), ThresholdSpec(2.0)
    ts = np.geomspace(0.01, 30, 120)
    c = invert_curve(lambda s: fpt_lt_below(s, 0.5, th, m), ts, probability=True)
    assert np.all((c.values >= 0) & (c.values <= 1))
    assert c.max_monotone_violation() < 5e-4
    assert np.all(np.diff(c.values) >= -5e-4)


def test_invert_at_is_not_clamped():
    # the primitive returns raw values; only the probability wrapper clamps
    c = invert_curve(lambda s: 2 / s, [1.0], probability=True)
    assert c.values[0] == 1.0 and c.raw_values[0] == pytest.approx(2.0, abs=1e-8)
    assert invert_at(lambda s: 2 / s, 1.0) == pytest.approx(2.0, abs=1e-8)
