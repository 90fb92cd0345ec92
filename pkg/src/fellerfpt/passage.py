"""Time-domain passage quantities: probabilities, densities and mean times."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from scipy import integrate, special

from .invert import DEFAULT_CONFIG, StehfestConfig, invert_at, invert_with_estimate
from .laplace import (
    THETA_ONE_OFFSET,
    IntervalSpec,
    LimitRegimeWarning,
    SingularConfigurationError,
    ThresholdSpec,
    escape_lt,
    fpt_lt,
    fpt_lt_origin,
)
from .process import DimensionlessModel
from .specfun import DomainError, kummer_f, kummer_u, log_gamma_upper

__all__ = [
    "CurveMethod",
    "PassageCurve",
    "MeanTimeResult",
    "ApproximationWarning",
    "default_t_grid",
    "fpt_prob_origin",
    "fpt_density_origin",
    "fpt_prob_origin_asymptotic",
    "fpt_prob",
    "fpt_curve",
    "fpt_prob_large_threshold",
    "escape_prob",
    "escape_curve",
    "fpt_density",
    "mfpt",
    "mfpt_origin",
    "mean_escape_time",
    "exponential_asymptote",
    "integral_u1",
    "integral_f1",
]

QUAD_RTOL = 1e-12


class ApproximationWarning(UserWarning):
    """An asymptotic formula was used outside its comfortable range."""


class CurveMethod(str, Enum):
    CLOSED_FORM = "closed_form"
    STEHFEST = "stehfest"
    LARGE_THRESHOLD = "large_threshold_series"
    EXPONENTIAL_ASYMPTOTIC = "exponential_asymptotic"


@dataclass
class PassageCurve:
    """A sampled passage probability ``t -> W(t)``."""

    t_grid: np.ndarray
    values: np.ndarray
    method: CurveMethod
    meta: dict = field(default_factory=dict)
    error_estimate: np.ndarray | None = None
    raw_values: np.ndarray | None = None

    def max_monotone_violation(self) -> float:
        """Largest decrease between consecutive grid values (0 if monotone)."""
        d = np.diff(self.values)
        return float(max(0.0, -d.min())) if d.size else 0.0


@dataclass(frozen=True)
class MeanTimeResult:
    value: float
    quadrature_error: float = 0.0
    finite: bool = True

    @classmethod
    def infinite(cls) -> "MeanTimeResult":
        return cls(math.inf, 0.0, False)

    def __float__(self) -> float:
        return self.value


def default_t_grid(t_min: float, t_max: float, per_decade: int = 25) -> np.ndarray:
    """Geometric time grid with ``per_decade`` points per decade."""
    if not 0 < t_min < t_max:
        raise DomainError("need 0 < t_min < t_max")
    n = max(2, int(math.ceil(per_decade * math.log10(t_max / t_min))) + 1)
    return np.geomspace(t_min, t_max, n)


def _effective_theta(theta: float) -> float:
    if theta == 1.0:
        warnings.warn("theta = 1: origin passage evaluated as the theta -> 1- limit",
                      LimitRegimeWarning, stacklevel=3)
        return 1.0 - THETA_ONE_OFFSET
    return theta


# ---------------------------------------------------------------------------
# hitting the origin
# ---------------------------------------------------------------------------

def _origin_arg(t: float, x: float) -> float:
    return x * math.exp(-t) / -math.expm1(-t)


def fpt_prob_origin(t: float, x: float, m: DimensionlessModel) -> float:
    """Probability of having reached the origin by time ``t``.

    ``Gamma(1-theta, u) / Gamma(1-theta)`` with ``u = x e^-t / (1 - e^-t)`` for
    theta < 1, zero for theta > 1.
    """
    if not t > 0 or not x > 0:
        raise DomainError("need t > 0 and x > 0")
    if m.theta > 1.0:
        return 0.0
    theta = _effective_theta(m.theta)
    return float(special.gammaincc(1.0 - theta, _origin_arg(t, x)))


def fpt_density_origin(t: float, x: float, m: DimensionlessModel) -> float:
    """Time derivative of :func:`fpt_prob_origin`."""
    if not t > 0 or not x > 0:
        raise DomainError("need t > 0 and x > 0")
    if m.theta > 1.0:
        return 0.0
    theta = _effective_theta(m.theta)
    log_1me = math.log(-math.expm1(-t))
    log_u = math.log(x) - t - log_1me
    # dW/dt = u^{-theta} e^{-u} / Gamma(1-theta) * u / (1 - e^{-t})
    return math.exp((1.0 - theta) * log_u - math.exp(log_u) - math.lgamma(1.0 - theta)
                    - log_1me)


def fpt_prob_origin_asymptotic(t: float, x: float, m: DimensionlessModel) -> float:
    """Long-time form ``1 - x^{1-theta} e^{-(1-theta) t} / Gamma(2-theta)``.

    The neglected terms are ``O(exp(-(2-theta) t))``.
    """
    theta = m.theta
    if theta >= 1.0:
        raise DomainError("the long-time origin expansion needs theta < 1")
    if not x > 0:
        raise DomainError(f"x must be > 0, got {x}")
    if t < 3.0:
        warnings.warn(f"t={t} is short for the long-time expansion",
                      ApproximationWarning, stacklevel=2)
    return 1.0 - math.exp((1.0 - theta) * (math.log(x) - t) - math.lgamma(2.0 - theta))


# ---------------------------------------------------------------------------
# large threshold
# ---------------------------------------------------------------------------

def fpt_prob_large_threshold(t: float, x: float, x_c: float, m: DimensionlessModel,
                             n_terms: int | None = None) -> float:
    """Large-threshold approximation of the hitting probability from below.

    Sums ``x_c^theta e^{-x_c} / Gamma(theta) * sum_n x^n Gamma(n, x_c e^-t)
    / ((theta)_n n!)``; the n = 0 term uses ``Gamma(0, z) = E1(z)``.  With
    ``n_terms=None`` terms are added until they fall below 1e-17 of the sum.
    """
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    if not 0 <= x < x_c:
        raise DomainError(f"need 0 <= x < x_c, got x={x}, x_c={x_c}")
    if x_c < 10.0:
        warnings.warn(f"x_c={x_c} is small for the large-threshold series",
                      ApproximationWarning, stacklevel=2)
    theta = m.theta
    z = x_c * math.exp(-t)
    log_pref = theta * math.log(x_c) - x_c - math.lgamma(theta)
    logs = [log_gamma_upper(0.0, z)]
    limit = n_terms if n_terms is not None else 5000
    if x > 0:
        log_x = math.log(x)
        log_poch = 0.0
        for n in range(1, limit + 1):
            log_poch += math.log(theta + n - 1.0)
            term = n * log_x - math.lgamma(n + 1.0) - log_poch + log_gamma_upper(float(n), z)
            logs.append(term)
            if n_terms is None and n > 2 and term - max(logs) < math.log(1e-17):
                break
    logs = np.array(logs)
    top = logs.max()
    total = float(np.sum(np.exp(logs - top)))
    if x > 0 and logs[-1] - top - math.log(total) > math.log(1e-12):
        warnings.warn("large-threshold series not converged; raise n_terms",
                      ApproximationWarning, stacklevel=2)
    return math.exp(log_pref + top + math.log(total))


# ---------------------------------------------------------------------------
# general threshold and interval
# ---------------------------------------------------------------------------

def _clamp01(v: float) -> float:
    return min(1.0, max(0.0, v))


def fpt_prob(t: float, x: float, th: ThresholdSpec, m: DimensionlessModel,
             method: str = "auto", cfg: StehfestConfig = DEFAULT_CONFIG) -> float:
    """Probability of having reached the threshold by time ``t``.

    ``method`` is ``auto``, ``stehfest`` or ``large_threshold``.  In ``auto``
    mode a zero threshold uses the closed form, a threshold above 10 with a
    start below it uses the large-threshold series, and everything else is a
    Stehfest inversion of the exact transform (clamped to [0, 1]).
    """
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    if x == th.x_c:
        return 1.0
    if method not in ("auto", "stehfest", "large_threshold"):
        raise ValueError(f"unknown method {method!r}")
    if th.x_c == 0 and method != "stehfest":
        return fpt_prob_origin(t, x, m)
    below = x < th.x_c
    if method == "large_threshold" or (method == "auto" and below and th.x_c > 10.0):
        if not below:
            raise DomainError("the large-threshold series needs x < x_c")
        return _clamp01(fpt_prob_large_threshold(t, x, th.x_c, m))
    return _clamp01(invert_at(lambda s: fpt_lt(s, x, th, m), t, cfg))


def fpt_curve(t_grid: Sequence[float], x: float, th: ThresholdSpec, m: DimensionlessModel,
              method: str = "auto", cfg: StehfestConfig = DEFAULT_CONFIG) -> PassageCurve:
    """Hitting probability on a time grid.

    ``method`` additionally accepts ``closed_form`` (origin only) and
    ``asymptotic`` (``1 - exp(-t/T_c)``).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    meta = {"x": x, "x_c": th.x_c, "theta": m.theta, "n_terms": cfg.n_terms}
    if method == "asymptotic":
        T = mfpt(x, th, m)
        vals = np.array([exponential_asymptote(t, T) for t in t_grid])
        meta["mean_time"] = T.value
        return PassageCurve(t_grid, vals, CurveMethod.EXPONENTIAL_ASYMPTOTIC, meta)
    if method == "closed_form" or (method == "auto" and th.x_c == 0):
        if th.x_c != 0:
            raise DomainError("a closed form exists only for the origin (x_c = 0)")
        vals = np.array([fpt_prob_origin(t, x, m) for t in t_grid])
        return PassageCurve(t_grid, vals, CurveMethod.CLOSED_FORM, meta,
                            error_estimate=np.zeros_like(vals), raw_values=vals.copy())
    below = x < th.x_c
    if method == "large_threshold" or (method == "auto" and below and th.x_c > 10.0):
        vals = np.array([fpt_prob(t, x, th, m, "large_threshold") for t in t_grid])
        return PassageCurve(t_grid, vals, CurveMethod.LARGE_THRESHOLD, meta,
                            raw_values=vals.copy())
    if method not in ("auto", "stehfest"):
        raise ValueError(f"unknown method {method!r}")
    if x == th.x_c:
        ones = np.ones_like(t_grid)
        return PassageCurve(t_grid, ones, CurveMethod.STEHFEST, meta,
                            error_estimate=np.zeros_like(ones), raw_values=ones.copy())
    return _stehfest_curve(lambda s: fpt_lt(s, x, th, m), t_grid, cfg, meta)


def _stehfest_curve(f_hat, t_grid, cfg, meta) -> PassageCurve:
    raw, err = [], []
    for t in t_grid:
        v, e = invert_with_estimate(f_hat, float(t), cfg)
        raw.append(v)
        err.append(e)
    raw = np.array(raw)
    return PassageCurve(np.asarray(t_grid, dtype=float), np.clip(raw, 0.0, 1.0),
                        CurveMethod.STEHFEST, meta, np.array(err), raw)


def _check_escape(x: float, iv: IntervalSpec, m: DimensionlessModel) -> None:
    if not iv.contains(x):
        raise DomainError(f"start x={x} outside [{iv.a}, {iv.b}]")
    if iv.a == 0 and m.theta >= 1.0:
        raise SingularConfigurationError(
            "a = 0 with theta >= 1: the origin is unattainable; use fpt_prob with x_c = b")


def escape_prob(t: float, x: float, iv: IntervalSpec, m: DimensionlessModel,
                cfg: StehfestConfig = DEFAULT_CONFIG) -> float:
    """Probability of having left ``(a, b)`` by time ``t`` (Stehfest, clamped)."""
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    _check_escape(x, iv, m)
    if x in (iv.a, iv.b):
        return 1.0
    return _clamp01(invert_at(lambda s: escape_lt(s, x, iv, m), t, cfg))


def escape_curve(t_grid: Sequence[float], x: float, iv: IntervalSpec, m: DimensionlessModel,
                 method: str = "stehfest", cfg: StehfestConfig = DEFAULT_CONFIG) -> PassageCurve:
    t_grid = np.asarray(t_grid, dtype=float)
    meta = {"x": x, "a": iv.a, "b": iv.b, "theta": m.theta, "n_terms": cfg.n_terms}
    if method == "asymptotic":
        T = mean_escape_time(x, iv, m)
        vals = np.array([exponential_asymptote(t, T) for t in t_grid])
        meta["mean_time"] = T.value
        return PassageCurve(t_grid, vals, CurveMethod.EXPONENTIAL_ASYMPTOTIC, meta)
    if method not in ("auto", "stehfest"):
        raise ValueError(f"unknown escape method {method!r}")
    _check_escape(x, iv, m)
    if x in (iv.a, iv.b):
        ones = np.ones_like(t_grid)
        return PassageCurve(t_grid, ones, CurveMethod.STEHFEST, meta,
                            error_estimate=np.zeros_like(ones), raw_values=ones.copy())
    return _stehfest_curve(lambda s: escape_lt(s, x, iv, m), t_grid, cfg, meta)


def fpt_density(t: float, x: float, th: ThresholdSpec, m: DimensionlessModel,
                cfg: StehfestConfig = DEFAULT_CONFIG) -> float:
    """First-passage time density ``dW/dt``.

    Exact for the origin; otherwise the Stehfest inverse of ``s W_hat(s)``,
    floored at zero.
    """
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    if th.x_c == 0:
        return fpt_density_origin(t, x, m)
    if x == th.x_c:
        return 0.0
    v = invert_at(lambda s: s * fpt_lt(s, x, th, m), t, cfg)
    return max(0.0, v)


# ---------------------------------------------------------------------------
# mean times
# ---------------------------------------------------------------------------

def _u1(z: float, theta: float) -> float:
    return kummer_u(1.0, 1.0 + theta, z)


def _f1(z: float, theta: float) -> float:
    return kummer_f(1.0, 1.0 + theta, z)


def _leading_antiderivative(z: float, theta: float) -> float:
    """Antiderivative of ``Gamma(theta) z^{-theta}``, the small-z part of U(1,1+theta,z)."""
    if theta == 1.0:
        return math.log(z)
    return math.gamma(theta) * z ** (1.0 - theta) / (1.0 - theta)


def integral_u1(lo: float, hi: float, theta: float) -> tuple[float, float]:
    """``int_lo^hi U(1, 1+theta, z) dz`` and its quadrature error.

    On ``[lo, 1]`` the leading term ``Gamma(theta) z^{-theta}`` is integrated
    analytically; ``lo = 0`` is allowed for theta < 1.
    """
    if hi < lo:
        v, e = integral_u1(hi, lo, theta)
        return -v, e
    if lo < 0 or (lo == 0 and theta >= 1.0):
        raise DomainError("int_0 U(1,1+theta,z) dz diverges for theta >= 1")
    if lo == hi:
        return 0.0, 0.0
    total, err = 0.0, 0.0
    split = min(hi, 1.0)
    if lo < split:
        lead = math.gamma(theta)

        def rem(z):
            return _u1(z, theta) - lead * z ** (-theta) if z > 0 else -1.0 / theta

        v, e = integrate.quad(rem, lo, split, epsabs=1e-14, epsrel=QUAD_RTOL, limit=200)
        if lo == 0:
            head = math.gamma(theta) * split ** (1.0 - theta) / (1.0 - theta)
        else:
            head = _leading_antiderivative(split, theta) - _leading_antiderivative(lo, theta)
        total += head + v
        err += e
    if hi > 1.0:
        v, e = integrate.quad(_u1, max(lo, 1.0), hi, args=(theta,), epsabs=1e-14,
                              epsrel=QUAD_RTOL, limit=200)
        total += v
        err += e
    return total, err


def integral_f1(lo: float, hi: float, theta: float) -> tuple[float, float]:
    """``int_lo^hi F(1, 1+theta, z) dz`` and its quadrature error."""
    if hi < lo:
        v, e = integral_f1(hi, lo, theta)
        return -v, e
    if lo == hi:
        return 0.0, 0.0
    return integrate.quad(_f1, lo, hi, args=(theta,), epsabs=1e-14, epsrel=QUAD_RTOL,
                          limit=200)


def mfpt_origin(x: float, m: DimensionlessModel) -> MeanTimeResult:
    """Mean time to reach the origin; infinite for theta >= 1."""
    if not x > 0:
        raise DomainError(f"x must be > 0, got {x}")
    if m.theta >= 1.0:
        return MeanTimeResult.infinite()
    v, e = integral_u1(0.0, x, m.theta)
    return MeanTimeResult(v, e, True)


def mfpt(x: float, th: ThresholdSpec, m: DimensionlessModel) -> MeanTimeResult:
    """Mean first-passage time to ``th.x_c`` from ``x``.

    Below the threshold: ``(1/theta) int_x^{x_c} F(1,1+theta,z) dz``;
    above it: ``int_{x_c}^x U(1,1+theta,z) dz``.
    """
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x}")
    if x == th.x_c:
        return MeanTimeResult(0.0, 0.0, True)
    if th.x_c == 0:
        return mfpt_origin(x, m)
    if x < th.x_c:
        v, e = integral_f1(x, th.x_c, m.theta)
        return MeanTimeResult(v / m.theta, e / m.theta, True)
    v, e = integral_u1(th.x_c, x, m.theta)
    return MeanTimeResult(v, e, True)


def mean_escape_time(x: float, iv: IntervalSpec, m: DimensionlessModel) -> MeanTimeResult:
    """Mean time to leave ``(a, b)`` starting from ``x``: N(x) / D(x).

    ``N = IU(a,x) IF(0,b) + IU(x,b) IF(0,a) - IU(a,b) IF(0,x)`` and
    ``D = IF(a,b) + theta IU(a,b)``, where ``IU(p,q)`` and ``IF(p,q)``
    integrate U(1,1+theta,.) and F(1,1+theta,.) over ``[p, q]``.  Expanding
    the sums reduces N to ``IU(a,x) IF(x,b) - IU(x,b) IF(a,x)``.
    """
    a, b, th = iv.a, iv.b, m.theta
    if not iv.contains(x):
        raise DomainError(f"start x={x} outside [{a}, {b}]")
    if a == 0 and th >= 1.0:
        raise SingularConfigurationError(
            "a = 0 with theta >= 1: the origin is unattainable; use mfpt with x_c = b")
    if x in (a, b):
        return MeanTimeResult(0.0, 0.0, True)
    iu_ax, e1 = integral_u1(a, x, th)
    iu_xb, e2 = integral_u1(x, b, th)
    if_ax, e3 = integral_f1(a, x, th)
    if_xb, e4 = integral_f1(x, b, th)
    # the IF(0, .) pieces of N cancel, leaving two products
    num = iu_ax * if_xb - iu_xb * if_ax
    den = if_ax + if_xb + th * (iu_ax + iu_xb)
    value = num / den
    err_num = if_xb * e1 + iu_xb * e3 + if_ax * e2 + iu_ax * e4
    err_den = e3 + e4 + th * (e1 + e2)
    err = abs(value) * (err_num / abs(num) + err_den / den)
    return MeanTimeResult(value, err, True)


def exponential_asymptote(t: float, mean_time: MeanTimeResult | float) -> float:
    """Long-time law ``1 - exp(-t / T)`` for a finite mean time ``T``."""
    T = float(mean_time)
    if not math.isfinite(T) or T <= 0:
        raise DomainError(f"the exponential law needs a finite positive mean time, got {T}")
    return -math.expm1(-t / T)
