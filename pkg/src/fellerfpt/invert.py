"""Stehfest numerical Laplace inversion on the real axis."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .specfun import DomainError

__all__ = [
    "LaplaceFn",
    "StehfestConfig",
    "InversionError",
    "stehfest_weights",
    "invert_at",
    "invert_with_estimate",
    "invert_curve",
]

LaplaceFn = Callable[[float], float]

LN2 = math.log(2.0)


class InversionError(RuntimeError):
    """The transform could not be evaluated at one of the Stehfest nodes."""

    def __init__(self, s: float, cause: BaseException):
        super().__init__(f"transform evaluation failed at s={s!r}: {cause}")
        self.s = s


@lru_cache(maxsize=None)
def _exact_weights(n: int) -> tuple[Fraction, ...]:
    h = n // 2
    fac = math.factorial
    out = []
    for k in range(1, n + 1):
        acc = Fraction(0)
        for j in range((k + 1) // 2, min(k, h) + 1):
            acc += Fraction(
                j**h * fac(2 * j),
                fac(h - j) * fac(j) * fac(j - 1) * fac(k - j) * fac(2 * j - k),
            )
        out.append((-1) ** (k + h) * acc)
    return tuple(out)


def stehfest_weights(n: int) -> list[float]:
    """Stehfest weights V_1..V_N, accumulated exactly and rounded once.

    >>> stehfest_weights(4)
    [-2.0, 26.0, -48.0, 24.0]
    """
    if int(n) != n or n % 2 or not 4 <= n <= 20:
        raise DomainError(f"Stehfest N must be an even integer in [4, 20], got {n}")
    return [float(v) for v in _exact_weights(int(n))]


@dataclass(frozen=True)
class StehfestConfig:
    n_terms: int = 14
    weight_cache: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "weight_cache", tuple(stehfest_weights(self.n_terms)))

    def lower(self) -> "StehfestConfig":
        """Config with N - 2 terms, used for the error estimate."""
        return StehfestConfig(max(4, self.n_terms - 2))


DEFAULT_CONFIG = StehfestConfig()


def _samples(f_hat: LaplaceFn, t: float, n: int) -> np.ndarray:
    step = LN2 / t
    vals = np.empty(n)
    for k in range(1, n + 1):
        s = k * step
        try:
            vals[k - 1] = f_hat(s)
        except (ArithmeticError, ValueError) as exc:
            raise InversionError(s, exc) from exc
    return vals


def invert_at(f_hat: LaplaceFn, t: float, cfg: StehfestConfig = DEFAULT_CONFIG) -> float:
    """Approximate ``f(t)`` from its transform: ``(ln2/t) sum_k V_k f_hat(k ln2/t)``."""
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    vals = _samples(f_hat, t, cfg.n_terms)
    return LN2 / t * math.fsum(np.multiply(cfg.weight_cache, vals))


def invert_with_estimate(f_hat: LaplaceFn, t: float,
                         cfg: StehfestConfig = DEFAULT_CONFIG) -> tuple[float, float]:
    """Inverse at ``t`` plus ``|result(N) - result(N-2)|`` as an error estimate."""
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    vals = _samples(f_hat, t, cfg.n_terms)
    hi = LN2 / t * math.fsum(np.multiply(cfg.weight_cache, vals))
    low_cfg = cfg.lower()
    # the N-2 rule uses the first N-2 nodes, which coincide with ours
    lo = LN2 / t * math.fsum(np.multiply(low_cfg.weight_cache, vals[: low_cfg.n_terms]))
    return hi, abs(hi - lo)


def invert_curve(f_hat: LaplaceFn, t_grid: Sequence[float],
                 cfg: StehfestConfig = DEFAULT_CONFIG, *, probability: bool = False):
    """Invert on a grid of times and wrap the result in a ``PassageCurve``.

    With ``probability=True`` the values are clamped to [0, 1]; the raw
    inverses are kept in ``curve.raw_values`` either way.
    """
    from .passage import CurveMethod, PassageCurve

    t_grid = [float(t) for t in t_grid]
    raw, err = [], []
    for t in t_grid:
        v, e = invert_with_estimate(f_hat, t, cfg)
        raw.append(v)
        err.append(e)
    raw_arr = np.array(raw)
    values = np.clip(raw_arr, 0.0, 1.0) if probability else raw_arr.copy()
    return PassageCurve(
        t_grid=np.array(t_grid),
        values=values,
        method=CurveMethod.STEHFEST,
        meta={"n_terms": cfg.n_terms},
        error_estimate=np.array(err),
        raw_values=raw_arr,
    )
