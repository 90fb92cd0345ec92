"""Real-argument special functions used by the Feller passage formulas.

The confluent hypergeometric functions F = 1F1 and U are implemented here
directly: F by a log-scaled power series, U by its Laplace-type integral
representation evaluated with adaptive quadrature.  Both have log-space
entry points because the Stehfest sweeps evaluate them at large ``a`` where
the plain values overflow.  Gamma-family and Bessel functions delegate to
:mod:`scipy.special` behind thin domain-checking wrappers.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

__all__ = [
    "DomainError",
    "PoleError",
    "SpecialFnResult",
    "kummer_f",
    "kummer_f_result",
    "log_kummer_f",
    "kummer_u",
    "kummer_u_result",
    "log_kummer_u",
    "bessel_i",
    "bessel_i_scaled",
    "gamma_upper",
    "log_gamma_upper",
    "digamma",
    "exp_integral_e1",
    "log_gamma",
    "pochhammer",
]

EPS = np.finfo(float).eps
SERIES_RTOL = 1e-16
SERIES_MAX_TERMS = 10_000
QUAD_RTOL = 2e-14
# below this log-density offset from the peak the integrand is ignored
LOG_CUTOFF = -46.0


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


class PoleError(DomainError):
    """Argument at a pole of a special function."""


@dataclass(frozen=True)
class SpecialFnResult:
    """A function value with an absolute error estimate and status flags."""

    value: float
    abs_error_estimate: float
    converged: bool = True
    overflow: bool = False

    def __float__(self) -> float:
        return self.value


def _is_nonpositive_integer(c: float) -> bool:
    return c <= 0 and float(c).is_integer()


# ---------------------------------------------------------------------------
# Kummer F = 1F1
# ---------------------------------------------------------------------------

def _f_series(a: float, c: float, x: float):
    """Sum the 1F1 series in log space.

    Returns ``(log|F|, sign, rel_err, converged)``.
    """
    if x == 0.0 or a == 0.0:
        return 0.0, 1.0, 0.0, True
    k = 64
    while True:
        n = np.arange(k, dtype=float)
        ratio = (a + n) / (c + n) * x / (n + 1.0)
        with np.errstate(divide="ignore"):
            logr = np.log(np.abs(ratio))
        logt = np.concatenate(([0.0], np.cumsum(logr)))
        sgn = np.concatenate(([1.0], np.cumprod(np.sign(ratio))))
        finite = np.isfinite(logt)
        if not finite.all():
            # a is a non-positive integer: the series is a polynomial
            stop = int(np.argmin(finite))
            logt, sgn = logt[:stop], sgn[:stop]
            converged = True
            break
        top = logt.max()
        terms = sgn * np.exp(logt - top)
        partial = np.cumsum(terms)
        small = np.abs(terms[1:]) < SERIES_RTOL * np.abs(partial[1:])
        # three consecutive negligible terms, past the point where terms shrink
        run = small[:-2] & small[1:-1] & small[2:]
        shrinking = np.abs(ratio[1:-1]) < 1.0
        hit = np.flatnonzero(run & shrinking)
        if hit.size:
            stop = int(hit[0]) + 4
            logt, sgn = logt[:stop], sgn[:stop]
            converged = True
            break
        if k >= SERIES_MAX_TERMS:
            converged = False
            break
        k = min(2 * k, SERIES_MAX_TERMS)
    top = logt.max()
    w = np.exp(logt - top)
    total = float(np.sum(sgn * w))
    if total == 0.0:
        return -math.inf, 0.0, math.inf, converged
    # rounding grows with the largest term relative to the sum
    rel_err = 4 * EPS * float(np.sum(w)) / abs(total) * math.sqrt(len(w))
    return top + math.log(abs(total)), math.copysign(1.0, total), rel_err, converged


def log_kummer_f(a: float, c: float, x: float) -> tuple[float, float]:
    """Return ``(log|F(a,c,x)|, sign)``."""
    if _is_nonpositive_integer(c):
        raise PoleError(f"1F1 undefined for c={c} (non-positive integer)")
    if not math.isfinite(x) or x < 0:
        raise DomainError(f"kummer_f requires finite x >= 0, got {x}")
    logv, sign, _, _ = _f_series(float(a), float(c), float(x))
    return logv, sign


def kummer_f_result(a: float, c: float, x: float) -> SpecialFnResult:
    """Kummer F(a, c, x) with error estimate and convergence flag."""
    if _is_nonpositive_integer(c):
        raise PoleError(f"1F1 undefined for c={c} (non-positive integer)")
    if not math.isfinite(x) or x < 0:
        raise DomainError(f"kummer_f requires finite x >= 0, got {x}")
    logv, sign, rel, conv = _f_series(float(a), float(c), float(x))
    if logv > 709.78:
        return SpecialFnResult(sign * math.inf, math.inf, conv, overflow=True)
    value = sign * math.exp(logv)
    return SpecialFnResult(value, abs(value) * rel, conv)


def kummer_f(a: float, c: float, x: float) -> float:
    r"""Confluent hypergeometric function of the first kind.

    .. math:: F(a,c,x) = \sum_{n\ge0} \frac{(a)_n}{(c)_n}\frac{x^n}{n!}

    Overflow is returned as a signed infinity; use :func:`kummer_f_result`
    for the flag and error estimate.
    """
    return kummer_f_result(a, c, x).value


# ---------------------------------------------------------------------------
# Kummer U
# ---------------------------------------------------------------------------

def _u_breakpoints(a: float, c: float, x: float, lo: float):
    """Quadrature breakpoints on ``[lo, inf)`` for the U integrand.

    Returns the sorted breakpoints, a reference log-integrand used for
    scaling, and the log-integrand itself.
    """
    def phi(z):
        return -x * z + (a - 1.0) * math.log(z) + (c - a - 1.0) * math.log1p(z)

    pts = {lo}
    # stationary point of phi: x z^2 + (x - c + 2) z - (a - 1) = 0
    B = x - c + 2.0
    disc = B * B + 4.0 * x * (a - 1.0)
    root = (-B + math.sqrt(disc)) / (2.0 * x) if disc >= 0 else -1.0
    if root > lo:
        curv = (a - 1.0) / root**2 + (c - a - 1.0) / (1.0 + root) ** 2
        width = 1.0 / math.sqrt(curv) if curv > 0 else max(root, 1.0)
        for m in (-8.0, -3.0, -1.0, 0.0, 1.0, 3.0, 8.0):
            z = root + m * width
            if z > lo:
                pts.add(z)
    z = max(max(pts), 1.0 / (1.0 + x))
    pts.add(z)
    logs = [phi(p) for p in pts if p > 0]
    if lo == 0.0 and a == 1.0:
        logs.append(0.0)  # phi(0); a < 1 always arrives with lo > 0
    ref = max(logs)
    while phi(z) - ref > LOG_CUTOFF and z < 1e300:
        z *= 2.0
        pts.add(z)
    return sorted(pts), ref, phi


def _quad(f, left, right, **kw):
    # roundoff warnings at this tolerance are expected; the returned error
    # estimate is propagated instead
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(f, left, right, epsabs=0.0, epsrel=QUAD_RTOL, limit=200, **kw)


def _u_integral(a: float, c: float, x: float):
    """log of the integral ``int_0^inf e^{-xz} z^{a-1} (1+z)^{c-a-1} dz``.

    Returns ``(log_value, rel_err)``.
    """
    pieces = []  # (log_scale, value, abserr)
    lo = 0.0
    if a < 1.0:
        # integrable z^{a-1} singularity: subtract the leading term on [0, z0]
        z0 = 1.0 / (1.0 + x + abs(c - a - 1.0))

        def g_minus_1(z):
            return math.expm1(-x * z + (c - a - 1.0) * math.log1p(z))

        val, err = _quad(g_minus_1, 0.0, z0, weight="alg", wvar=(a - 1.0, 0.0))
        head = z0**a / a
        pieces.append((0.0, head + val, err + EPS * head))
        lo = z0
    pts, ref, phi = _u_breakpoints(a, c, x, lo)

    def f(z):
        if z <= 0.0:
            return 0.0 if a > 1.0 else math.exp(-ref) if a == 1.0 else math.inf
        return math.exp(phi(z) - ref)

    for left, right in zip(pts[:-1], pts[1:]):
        val, err = _quad(f, left, right)
        pieces.append((ref, val, err))
    val, err = _quad(f, pts[-1], math.inf)
    pieces.append((ref, val, err))

    top = max(s for s, v, _ in pieces if v > 0)
    total = sum(v * math.exp(s - top) for s, v, _ in pieces)
    abserr = sum(e * math.exp(s - top) for s, _, e in pieces)
    return top + math.log(total), abserr / total


def _check_u_args(a: float, x: float) -> None:
    if not a > 0:
        raise DomainError(f"kummer_u implemented for a > 0, got a={a}")
    if not x > 0 or not math.isfinite(x):
        raise DomainError(f"kummer_u requires finite x > 0, got x={x}")


def log_kummer_u(a: float, c: float, x: float) -> float:
    """Return ``log U(a, c, x)`` (U is positive for a > 0, x > 0)."""
    _check_u_args(a, x)
    logi, _ = _u_integral(float(a), float(c), float(x))
    return logi - math.lgamma(a)


def kummer_u_result(a: float, c: float, x: float) -> SpecialFnResult:
    """Kummer U(a, c, x) with error estimate."""
    _check_u_args(a, x)
    logi, rel = _u_integral(float(a), float(c), float(x))
    logv = logi - math.lgamma(a)
    if logv > 709.78:
        return SpecialFnResult(math.inf, math.inf, True, overflow=True)
    value = math.exp(logv)
    return SpecialFnResult(value, value * (rel + 4 * EPS), rel < 1e-8)


def kummer_u(a: float, c: float, x: float) -> float:
    r"""Confluent hypergeometric function of the second kind, for a > 0.

    Evaluated from

    .. math:: U(a,c,x) = \frac{1}{\Gamma(a)}\int_0^\infty
              e^{-xz} z^{a-1} (1+z)^{c-a-1}\,dz,

    which stays regular when ``c`` is an integer, unlike the two-term
    combination of 1F1 functions whose Gamma prefactors have poles there.
    """
    return kummer_u_result(a, c, x).value


# ---------------------------------------------------------------------------
# Bessel, Gamma family
# ---------------------------------------------------------------------------

def bessel_i(nu: float, z: float) -> float:
    """Modified Bessel function of the first kind I_nu(z), z >= 0."""
    if z < 0:
        raise DomainError(f"bessel_i requires z >= 0, got {z}")
    if nu <= -1 and z == 0:
        raise DomainError("bessel_i(nu <= -1, 0) is singular")
    return float(special.iv(nu, z))


def bessel_i_scaled(nu, z):
    """``exp(-z) * I_nu(z)``; accepts arrays."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise DomainError("bessel_i_scaled requires z >= 0")
    out = special.ive(nu, z)
    return float(out) if out.ndim == 0 else out


def gamma_upper(a: float, z: float) -> float:
    r"""Upper incomplete gamma :math:`\Gamma(a,z)=\int_z^\infty y^{a-1}e^{-y}dy`."""
    if z < 0:
        raise DomainError(f"gamma_upper requires z >= 0, got {z}")
    if z == 0:
        if a <= 0:
            raise DomainError("gamma_upper(a <= 0, 0) diverges")
        return math.gamma(a) if a < 171.6 else math.inf
    if a > 0:
        return math.exp(log_gamma_upper(a, z))
    if a == 0:
        return float(special.exp1(z))
    # raise the order to (0, 1] then recur downward:
    # Gamma(a, z) = (Gamma(a+1, z) - z^a e^{-z}) / a
    m = math.ceil(-a)
    b = a + m
    val = float(special.exp1(z)) if b == 0 else gamma_upper(b, z)
    for _ in range(m):
        b -= 1.0
        val = (val - z**b * math.exp(-z)) / b
    return val


def log_gamma_upper(a: float, z: float) -> float:
    """``log Gamma(a, z)`` for a > 0, z >= 0."""
    if a <= 0:
        if a == 0 and z > 0:
            return math.log(special.exp1(z))
        raise DomainError("log_gamma_upper implemented for a > 0")
    if z < 0:
        raise DomainError(f"log_gamma_upper requires z >= 0, got {z}")
    q = float(special.gammaincc(a, z))
    if q > 0:
        return math.lgamma(a) + math.log(q)
    # far tail: Gamma(a,z) ~ z^{a-1} e^{-z} (1 + (a-1)/z + ...)
    return (a - 1.0) * math.log(z) - z + math.log1p((a - 1.0) / z)


def digamma(z: float) -> float:
    """Digamma function psi(z) = Gamma'(z)/Gamma(z)."""
    if _is_nonpositive_integer(z):
        raise PoleError(f"digamma has a pole at z={z}")
    return float(special.psi(z))


def exp_integral_e1(x: float) -> float:
    """Exponential integral E1(x) for x > 0."""
    if not x > 0:
        raise DomainError(f"exp_integral_e1 requires x > 0, got {x}")
    return float(special.exp1(x))


def log_gamma(z: float) -> float:
    if not z > 0:
        raise DomainError(f"log_gamma requires z > 0, got {z}")
    return math.lgamma(z)


def pochhammer(a: float, n: int) -> float:
    """Rising factorial (a)_n = a (a+1) ... (a+n-1)."""
    if n < 0 or int(n) != n:
        raise DomainError(f"pochhammer requires integer n >= 0, got {n}")
    out = 1.0
    for i in range(int(n)):
        out *= a + i
    return out
