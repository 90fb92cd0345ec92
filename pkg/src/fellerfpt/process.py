"""Feller process model: parameters, scaling, densities, origin boundary.

In dimensionless units the process obeys

    dX = -(X - theta) dt + sqrt(2 X) dW,

obtained from ``dY = (-alpha Y + beta) dt + k sqrt(Y) dW`` by ``t' = alpha t``
and ``X = (2 alpha / k^2) Y``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate, special

from .specfun import DomainError

__all__ = [
    "FellerParams",
    "DimensionlessModel",
    "OriginRegime",
    "BoundaryClass",
    "to_dimensionless",
    "classify_origin",
    "transition_pdf",
    "log_transition_pdf",
    "stationary_pdf",
    "pdf_laplace_x",
    "transition_moments",
    "integrate_against_pdf",
]


@dataclass(frozen=True)
class FellerParams:
    """Physical parameters of ``dY = (-alpha Y + beta) dt + k sqrt(Y) dW``."""

    alpha: float
    beta: float
    k: float

    def __post_init__(self):
        for name in ("alpha", "beta", "k"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be finite and > 0, got {v}")


@dataclass(frozen=True)
class DimensionlessModel:
    """Scaled model with saturation level ``theta``.

    ``time_scale`` is alpha (``t' = time_scale * t``) and ``state_scale`` is
    ``2 alpha / k^2`` (``X = state_scale * Y``).  A model built directly from
    ``theta`` uses unit scales.
    """

    theta: float
    time_scale: float = 1.0
    state_scale: float = 1.0

    def __post_init__(self):
        for name in ("theta", "time_scale", "state_scale"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be finite and > 0, got {v}")

    @classmethod
    def from_params(cls, p: FellerParams) -> "DimensionlessModel":
        return cls(
            theta=2.0 * p.beta / p.k**2,
            time_scale=p.alpha,
            state_scale=2.0 * p.alpha / p.k**2,
        )

    def to_params(self) -> FellerParams:
        alpha = self.time_scale
        k = math.sqrt(2.0 * alpha / self.state_scale)
        return FellerParams(alpha=alpha, beta=0.5 * self.theta * k * k, k=k)

    def to_state(self, y):
        """Physical state -> dimensionless state."""
        return np.multiply(y, self.state_scale)

    def to_time(self, t):
        """Physical time -> dimensionless time."""
        return np.multiply(t, self.time_scale)


def to_dimensionless(p: FellerParams) -> DimensionlessModel:
    return DimensionlessModel.from_params(p)


class OriginRegime(str, Enum):
    THETA_BELOW_ONE = "theta_below_one"
    THETA_EQUAL_ONE = "theta_equal_one"
    THETA_ABOVE_ONE = "theta_above_one"


@dataclass(frozen=True)
class BoundaryClass:
    accessible: bool
    regime: OriginRegime


def classify_origin(m: DimensionlessModel) -> BoundaryClass:
    """Accessibility of x = 0: accessible iff theta <= 1."""
    if m.theta < 1.0:
        regime = OriginRegime.THETA_BELOW_ONE
    elif m.theta == 1.0:
        regime = OriginRegime.THETA_EQUAL_ONE
    else:
        regime = OriginRegime.THETA_ABOVE_ONE
    return BoundaryClass(accessible=m.theta <= 1.0, regime=regime)


# ---------------------------------------------------------------------------
# transition density
# ---------------------------------------------------------------------------

def _check_t_x0(t: float, x0: float) -> None:
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    if not x0 > 0:
        raise DomainError(f"x0 must be > 0, got {x0}")


def _log_pdf(x: np.ndarray, t: float, x0: float, theta: float) -> np.ndarray:
    """log p(x, t | x0) for x > 0 and x0 >= 0 (x0 = 0 gives the Gamma law)."""
    a = -math.expm1(-t)  # 1 - e^{-t}
    if x0 == 0.0:
        return ((theta - 1.0) * np.log(x) - x / a - theta * math.log(a)
                - math.lgamma(theta))
    b = x0 * math.exp(-t)
    z = 2.0 * np.sqrt(x * b) / a
    # (x / b)^{(theta-1)/2} exp(-(x+b)/a) I_{theta-1}(z) / a, with the
    # exponentially scaled Bessel function absorbing e^{z}
    with np.errstate(divide="ignore"):
        log_iv = np.log(special.ive(theta - 1.0, z))
    return (-math.log(a) + 0.5 * (theta - 1.0) * (np.log(x) - math.log(b))
            - (x + b) / a + z + log_iv)


def _pdf_at_origin(t: float, x0: float, theta: float) -> float:
    if theta < 1.0:
        return math.inf
    if theta > 1.0:
        return 0.0
    a = -math.expm1(-t)
    return math.exp(-x0 * math.exp(-t) / a) / a


def log_transition_pdf(x, t: float, x0: float, m: DimensionlessModel):
    """Natural log of :func:`transition_pdf` (``-inf`` where the density is 0)."""
    _check_t_x0(t, x0)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise DomainError("x must be >= 0")
    out = np.empty_like(xa)
    pos = xa > 0
    out[pos] = _log_pdf(xa[pos], t, x0, m.theta)
    if not pos.all():
        p0 = _pdf_at_origin(t, x0, m.theta)
        out[~pos] = math.log(p0) if p0 > 0 else -math.inf
    return float(out) if out.ndim == 0 else out


def transition_pdf(x, t: float, x0: float, m: DimensionlessModel):
    r"""Transition density p(x, t | x0) of the scaled Feller process.

    .. math::
        p = \frac{1}{1-e^{-t}}\Big(\frac{x}{x_0e^{-t}}\Big)^{(\theta-1)/2}
            \exp\Big\{-\frac{x+x_0e^{-t}}{1-e^{-t}}\Big\}
            I_{\theta-1}\Big(\frac{2\sqrt{x x_0 e^{-t}}}{1-e^{-t}}\Big)

    Evaluated in log space.  At ``x = 0`` the limit is returned: ``inf`` for
    theta < 1, 0 for theta > 1 and ``exp(-x0 e^-t/(1-e^-t))/(1-e^-t)`` at
    theta = 1.  Accepts scalar or array ``x``.
    """
    return np.exp(log_transition_pdf(x, t, x0, m))


def stationary_pdf(x, m: DimensionlessModel):
    """Gamma(theta, 1) density, the t -> inf limit of the transition density."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise DomainError("x must be >= 0")
    th = m.theta
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp((th - 1.0) * np.log(xa) - xa - math.lgamma(th))
    if th == 1.0:
        out = np.where(xa == 0, 1.0, out)
    return float(out) if out.ndim == 0 else out


def pdf_laplace_x(sigma: float, t: float, x0: float, m: DimensionlessModel) -> float:
    """Laplace transform in x of the transition density, at ``sigma >= 0``."""
    if sigma < 0:
        raise DomainError(f"sigma must be >= 0, got {sigma}")
    _check_t_x0(t, x0)
    a = -math.expm1(-t)
    d = 1.0 + sigma * a
    return math.exp(-m.theta * math.log(d) - sigma * x0 * math.exp(-t) / d)


def transition_moments(t: float, x0: float, m: DimensionlessModel) -> tuple[float, float]:
    """Mean and variance of X(t) given X(0) = x0."""
    a = -math.expm1(-t)
    b = x0 * math.exp(-t)
    return m.theta * a + b, m.theta * a * a + 2.0 * a * b


# ---------------------------------------------------------------------------
# quadrature against the density
# ---------------------------------------------------------------------------

def integrate_against_pdf(g, t: float, x0: float, m: DimensionlessModel,
                          epsrel: float = 1e-11) -> tuple[float, float]:
    """Compute ``int_0^inf g(x) p(x, t | x0) dx`` by adaptive quadrature.

    For theta < 1 the density behaves like ``C x^{theta-1}`` at the origin; on
    ``(0, eps)`` the term ``g(0) C x^{theta-1}`` is integrated analytically and
    only the bounded remainder goes to quadrature.  ``x0 = 0`` is allowed.

    Returns ``(value, abs_error_estimate)``.
    """
    if not t > 0 or x0 < 0:
        raise DomainError("need t > 0 and x0 >= 0")
    th = m.theta
    a = -math.expm1(-t)
    b = x0 * math.exp(-t)
    mean = th * a + b
    sd = math.sqrt(th * a * a + 2.0 * a * b)
    x_max = mean + 40.0 * sd + 40.0 * a

    def p(x):
        return math.exp(float(_log_pdf(np.float64(x), t, x0, th)))

    def integrand(x):
        return g(x) * p(x) if x > 0 else 0.0

    total, err = 0.0, 0.0
    lo = 0.0
    if th < 1.0:
        eps = 0.01 * a / (1.0 + b / a)
        coef = math.exp(-b / a - th * math.log(a) - math.lgamma(th))
        g0 = g(0.0)
        total += g0 * coef * eps**th / th

        def remainder(x):
            return g(x) * p(x) - g0 * coef * x ** (th - 1.0) if x > 0 else 0.0

        v, e = integrate.quad(remainder, 0.0, eps, epsabs=0.0, epsrel=epsrel, limit=200)
        total += v
        err += e
        lo = eps
    pts = sorted({q for q in (mean - 3 * sd, mean - sd, mean, mean + sd, mean + 3 * sd,
                              mean + 10 * sd) if lo < q < x_max})
    edges = [lo] + pts + [x_max]
    for left, right in zip(edges[:-1], edges[1:]):
        v, e = integrate.quad(integrand, left, right, epsabs=1e-15, epsrel=epsrel, limit=200)
        total += v
        err += e
    return total, err
