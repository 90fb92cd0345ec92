"""Laplace-domain first-passage and escape probabilities.

Every function here returns the time-Laplace transform ``W_hat(s | x)`` of a
hitting or escape probability.  Kummer functions are combined in log space
so the ratios stay finite at the large ``s`` values a Stehfest sweep visits.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

from .process import DimensionlessModel
from .specfun import DomainError, log_kummer_f, log_kummer_u

__all__ = [
    "Side",
    "ThresholdSpec",
    "IntervalSpec",
    "SingularConfigurationError",
    "LimitRegimeWarning",
    "fpt_lt_below",
    "fpt_lt_above",
    "fpt_lt_origin",
    "fpt_lt",
    "escape_lt",
    "THETA_ONE_OFFSET",
]

# theta = 1 is evaluated just below 1 where the formulas are defined
THETA_ONE_OFFSET = 1e-8


class Side(str, Enum):
    FROM_BELOW = "from_below"
    FROM_ABOVE = "from_above"
    AUTO = "auto"


class SingularConfigurationError(DomainError):
    """The requested passage problem is ill-posed for this theta."""


class LimitRegimeWarning(UserWarning):
    """Result obtained as a limit (theta -> 1-), not from a stated formula."""


@dataclass(frozen=True)
class ThresholdSpec:
    x_c: float
    side: Side = Side.AUTO

    def __post_init__(self):
        if not self.x_c >= 0:
            raise DomainError(f"threshold must be >= 0, got {self.x_c}")
        object.__setattr__(self, "side", Side(self.side))

    def resolve(self, x: float) -> Side:
        """Branch used for a start at ``x``; ``x == x_c`` resolves to FROM_BELOW."""
        if self.side is not Side.AUTO:
            return self.side
        return Side.FROM_ABOVE if x > self.x_c else Side.FROM_BELOW


@dataclass(frozen=True)
class IntervalSpec:
    a: float
    b: float

    def __post_init__(self):
        if not (self.a >= 0 and self.b > self.a):
            raise DomainError(f"need 0 <= a < b, got a={self.a}, b={self.b}")

    def contains(self, x: float) -> bool:
        return self.a <= x <= self.b


def _check_s(s: float) -> None:
    if not s > 0:
        raise DomainError(f"s must be > 0, got {s}")


def fpt_lt_below(s: float, x: float, th: ThresholdSpec, m: DimensionlessModel) -> float:
    """``F(s,theta,x) / (s F(s,theta,x_c))`` for a start below the threshold."""
    _check_s(s)
    if not 0 <= x <= th.x_c:
        raise DomainError(f"start x={x} must lie in [0, x_c={th.x_c}]")
    lf_x, _ = log_kummer_f(s, m.theta, x)
    lf_c, _ = log_kummer_f(s, m.theta, th.x_c)
    return math.exp(lf_x - lf_c) / s


def fpt_lt_above(s: float, x: float, th: ThresholdSpec, m: DimensionlessModel) -> float:
    """``U(s,theta,x) / (s U(s,theta,x_c))`` for a start above the threshold."""
    _check_s(s)
    if th.x_c <= 0:
        raise DomainError("x_c = 0 is the origin problem; use fpt_lt_origin")
    if x < th.x_c:
        raise DomainError(f"start x={x} must be >= x_c={th.x_c}")
    if x == th.x_c:
        return 1.0 / s
    return math.exp(log_kummer_u(s, m.theta, x) - log_kummer_u(s, m.theta, th.x_c)) / s


def _log_u_at_origin(s: float, theta: float) -> float:
    """``log U(s, theta, 0+) = log Gamma(1-theta) - log Gamma(s+1-theta)``, theta < 1."""
    return math.lgamma(1.0 - theta) - math.lgamma(s + 1.0 - theta)


def fpt_lt_origin(s: float, x: float, m: DimensionlessModel) -> float:
    """Transform of the probability of reaching the origin by time t.

    For theta < 1 this is ``Gamma(s+1-theta) U(s,theta,x) / (s Gamma(1-theta))``;
    for theta > 1 the origin is never reached and the result is 0.  At
    theta = 1 the value at ``1 - THETA_ONE_OFFSET`` is returned with a
    :class:`LimitRegimeWarning`.
    """
    _check_s(s)
    if not x > 0:
        raise DomainError(f"x must be > 0, got {x}")
    theta = m.theta
    if theta > 1.0:
        return 0.0
    if theta == 1.0:
        warnings.warn("theta = 1: origin passage evaluated as the theta -> 1- limit",
                      LimitRegimeWarning, stacklevel=2)
        theta = 1.0 - THETA_ONE_OFFSET
    return math.exp(log_kummer_u(s, theta, x) - _log_u_at_origin(s, theta)) / s


def fpt_lt(s: float, x: float, th: ThresholdSpec, m: DimensionlessModel) -> float:
    """Dispatch to the origin, below- or above-threshold transform."""
    if th.x_c == 0:
        return fpt_lt_origin(s, x, m)
    if th.resolve(x) is Side.FROM_ABOVE:
        return fpt_lt_above(s, x, th, m)
    return fpt_lt_below(s, x, th, m)


def escape_lt(s: float, x: float, iv: IntervalSpec, m: DimensionlessModel) -> float:
    """Transform of the probability of having left ``(a, b)`` by time t.

    Built from F and U at a, b and x with the boundary conditions
    ``W_hat(a) = W_hat(b) = 1/s``.  Numerator and denominator are divided by
    ``F(b) U(a)`` so that only ratios bounded by one are exponentiated.
    """
    _check_s(s)
    a, b, th = iv.a, iv.b, m.theta
    if not iv.contains(x):
        raise DomainError(f"start x={x} outside [{a}, {b}]")
    if a == 0 and th >= 1.0:
        raise SingularConfigurationError(
            "a = 0 with theta >= 1: the origin is unattainable and U(s,theta,0) "
            "diverges; use fpt_lt_below with threshold b instead")
    if x == a or x == b:
        return 1.0 / s
    lf_a = log_kummer_f(s, th, a)[0]
    lf_b = log_kummer_f(s, th, b)[0]
    lf_x = log_kummer_f(s, th, x)[0]
    lu_a = _log_u_at_origin(s, th) if a == 0 else log_kummer_u(s, th, a)
    lu_b = log_kummer_u(s, th, b)
    lu_x = log_kummer_u(s, th, x)
    fx = math.exp(lf_x - lf_b)  # F(x)/F(b) <= 1
    ux = math.exp(lu_x - lu_a)  # U(x)/U(a) <= 1
    # expm1 keeps the small-s differences accurate
    num = math.expm1(lu_b - lu_a) * fx + math.expm1(lf_a - lf_b) * ux
    den = s * math.expm1(lf_a - lf_b + lu_b - lu_a)
    return num / den
