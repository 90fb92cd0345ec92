"""Monte Carlo oracle for passage times of the scaled Feller process.

The default scheme samples the exact transition law: given ``X(t) = x0`` the
state after ``dt`` is ``Gamma(theta + n, 1 - e^-dt)`` with
``n ~ Poisson(x0 e^-dt / (1 - e^-dt))``.  Only crossing detection is then
discretised.  An Euler full-truncation scheme is kept as an independent
cross-check.

Paths are simulated in fixed-size chunks; chunk ``i`` draws from the ``i``-th
child of ``SeedSequence(seed)``, so results depend only on the seed and the
number of paths, not on how chunks are scheduled.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
from scipy import special

from .laplace import IntervalSpec, SingularConfigurationError, ThresholdSpec
from .process import DimensionlessModel
from .specfun import DomainError

__all__ = [
    "SimKind",
    "CrossingDetection",
    "SimScheme",
    "ExitSide",
    "PassageSample",
    "McEstimate",
    "CensoringError",
    "sample_transition",
    "simulate_paths",
    "simulate_fpt",
    "simulate_escape",
    "estimate_mean",
    "empirical_cdf",
    "empirical_laplace",
    "ORIGIN_EPS",
    "CHUNK_SIZE",
]

ORIGIN_EPS = 1e-10
DEFAULT_MAX_T = 50.0
CHUNK_SIZE = 16384
MAX_CENSORED = 1e-3


class SimKind(str, Enum):
    EXACT = "exact_transition"
    EULER = "euler_full_truncation"


class CrossingDetection(str, Enum):
    ENDPOINT = "endpoint"
    BRIDGE = "bridge_corrected"


@dataclass(frozen=True)
class SimScheme:
    """Time stepping and crossing detection.

    ``bridge_corrected`` adds, between grid points, the probability that the
    path crossed and came back.  For a positive level this uses the Brownian
    bridge formula in the variable ``sqrt(X)``, whose diffusion coefficient is
    constant; for the origin with theta < 1 the exact killed/unkilled Bessel
    ratio is used.
    """

    kind: SimKind = SimKind.EXACT
    dt: float = 0.005
    crossing: CrossingDetection = CrossingDetection.ENDPOINT

    def __post_init__(self):
        object.__setattr__(self, "kind", SimKind(self.kind))
        object.__setattr__(self, "crossing", CrossingDetection(self.crossing))
        if not self.dt > 0:
            raise DomainError(f"dt must be > 0, got {self.dt}")
        if self.kind is SimKind.EULER and self.dt > 0.1:
            raise DomainError("the Euler scheme needs dt <= 0.1")


class ExitSide(str, Enum):
    THROUGH_A = "through_a"
    THROUGH_B = "through_b"
    CENSORED = "censored"


@dataclass
class PassageSample:
    """Simulated passage times; ``nan`` marks a path censored at ``max_t``.

    ``side`` is -1 (lower level), +1 (upper level) or 0 (censored).
    """

    times: np.ndarray
    side: np.ndarray
    max_t: float
    scheme: SimScheme

    @property
    def censored(self) -> np.ndarray:
        return np.isnan(self.times)

    @property
    def n(self) -> int:
        return self.times.size

    @property
    def censored_fraction(self) -> float:
        return float(self.censored.mean()) if self.n else 0.0

    def exit_sides(self) -> list[ExitSide]:
        lookup = {-1: ExitSide.THROUGH_A, 1: ExitSide.THROUGH_B, 0: ExitSide.CENSORED}
        return [lookup[int(v)] for v in self.side]


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_samples: int
    censored_fraction: float = 0.0


class CensoringError(RuntimeError):
    """Too many censored paths for an unbiased mean."""


# ---------------------------------------------------------------------------
# one-step samplers
# ---------------------------------------------------------------------------

def sample_transition(x0, dt: float, m: DimensionlessModel, rng: np.random.Generator):
    """Draw ``X(dt)`` given ``X(0) = x0`` from the exact transition law.

    Scalar ``x0`` gives a float, array ``x0`` one draw per entry.
    """
    if not dt > 0:
        raise DomainError(f"dt must be > 0, got {dt}")
    x0a = np.asarray(x0, dtype=float)
    if np.any(x0a < 0):
        raise DomainError("x0 must be >= 0")
    scale = -math.expm1(-dt)
    n = rng.poisson(x0a * (math.exp(-dt) / scale))
    out = np.asarray(rng.gamma(m.theta + n, scale))
    return float(out) if out.ndim == 0 else out


def _euler_step(x: np.ndarray, dt: float, theta: float, rng: np.random.Generator) -> np.ndarray:
    xp = np.maximum(x, 0.0)
    return x + (theta - xp) * dt + np.sqrt(2.0 * xp * dt) * rng.standard_normal(x.size)


def _bridge_level(level: float, x0: np.ndarray, x1: np.ndarray, dt: float) -> np.ndarray:
    """Probability that a bridge from x0 to x1 (same side) touched ``level``."""
    r = math.sqrt(level)
    d = (r - np.sqrt(x0)) * (r - np.sqrt(x1))
    return np.exp(-4.0 * np.maximum(d, 0.0) / dt)


def _bridge_origin(x0: np.ndarray, x1: np.ndarray, dt: float, theta: float) -> np.ndarray:
    """Exact probability that the bridge from x0 to x1 visits 0 (theta < 1)."""
    if theta >= 1.0:
        return np.zeros_like(x0)
    z = 2.0 * np.sqrt(x0 * x1 * math.exp(-dt)) / -math.expm1(-dt)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = special.ive(1.0 - theta, z) / special.ive(theta - 1.0, z)
    return np.where(z > 0, 1.0 - ratio, 1.0)


# ---------------------------------------------------------------------------
# path engine
# ---------------------------------------------------------------------------

# detector(x_old, x_new) -> (side, p_bridge_lower, p_bridge_upper)
Detector = Callable[[np.ndarray, np.ndarray], tuple]


def _run_chunk(x_start: float, n: int, m: DimensionlessModel, scheme: SimScheme,
               max_t: float, seed: np.random.SeedSequence, lower, upper):
    """Simulate ``n`` paths until one of the levels is reached.

    ``lower``/``upper`` are ``(level, bridge_fn)`` pairs or ``None``.
    """
    rng = np.random.default_rng(seed)
    dt, theta = scheme.dt, m.theta
    bridge = scheme.crossing is CrossingDetection.BRIDGE
    n_steps = int(math.ceil(max_t / dt - 1e-9))
    times = np.full(n, np.nan)
    side = np.zeros(n, dtype=np.int8)
    idx = np.arange(n)
    x = np.full(n, float(x_start))
    for k in range(1, n_steps + 1):
        if scheme.kind is SimKind.EXACT:
            x_new = sample_transition(x, dt, m, rng)
            obs = x_new
        else:
            x_new = _euler_step(x, dt, theta, rng)
            obs = np.maximum(x_new, 0.0)
        hit = np.zeros(idx.size, dtype=np.int8)
        if lower is not None:
            hit[obs <= lower[0]] = -1
        if upper is not None:
            hit[obs >= upper[0]] = 1
        if bridge:
            free = hit == 0
            x0f = np.maximum(x[free], 0.0)
            x1f = obs[free]
            p_lo = lower[1](x0f, x1f) if lower is not None else 0.0
            p_hi = upper[1](x0f, x1f) if upper is not None else 0.0
            p_lo = np.broadcast_to(p_lo, x1f.shape)
            p_hi = np.broadcast_to(p_hi, x1f.shape)
            u = rng.random(x1f.size)
            p_any = 1.0 - (1.0 - p_lo) * (1.0 - p_hi)
            crossed = u < p_any
            # split the crossing between the two levels in proportion
            to_lower = u < p_any * p_lo / np.where(p_lo + p_hi > 0, p_lo + p_hi, 1.0)
            sub = np.where(crossed, np.where(to_lower, -1, 1), 0).astype(np.int8)
            hit[free] = sub
        done = hit != 0
        if done.any():
            t_hit = (k - 0.5) * dt if bridge else k * dt
            times[idx[done]] = t_hit
            side[idx[done]] = hit[done]
            keep = ~done
            idx, x_new = idx[keep], x_new[keep]
        x = x_new
        if idx.size == 0:
            break
    return times, side


def simulate_paths(x: float, m: DimensionlessModel, scheme: SimScheme, max_t: float,
                   n_paths: int, seed: int, lower=None, upper=None,
                   workers: int = 1) -> PassageSample:
    """Run ``n_paths`` independent paths in seeded chunks."""
    if n_paths < 1:
        raise DomainError("n_paths must be >= 1")
    if not max_t > 0:
        raise DomainError("max_t must be > 0")
    n_chunks = -(-n_paths // CHUNK_SIZE)
    seeds = np.random.SeedSequence(seed).spawn(n_chunks)
    sizes = [min(CHUNK_SIZE, n_paths - i * CHUNK_SIZE) for i in range(n_chunks)]

    def job(i):
        return _run_chunk(x, sizes[i], m, scheme, max_t, seeds[i], lower, upper)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(job, range(n_chunks)))
    else:
        parts = [job(i) for i in range(n_chunks)]
    times = np.concatenate([p[0] for p in parts])
    side = np.concatenate([p[1] for p in parts])
    return PassageSample(times, side, max_t, scheme)


def _level(level: float, m: DimensionlessModel, dt: float):
    if level == 0.0:
        return (ORIGIN_EPS, lambda x0, x1: _bridge_origin(x0, x1, dt, m.theta))
    return (level, lambda x0, x1: _bridge_level(level, x0, x1, dt))


def simulate_fpt(x: float, th: ThresholdSpec, m: DimensionlessModel,
                 scheme: SimScheme = SimScheme(), max_t: float = DEFAULT_MAX_T,
                 n_paths: int = 1, seed: int = 0, workers: int = 1) -> PassageSample:
    """First-passage times to ``th.x_c`` from ``x``.

    For ``x_c = 0`` a path counts as absorbed once ``X <= ORIGIN_EPS``.
    """
    if x == th.x_c:
        raise DomainError("start equals the threshold; the passage time is 0")
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x}")
    lvl = _level(th.x_c, m, scheme.dt)
    if x < th.x_c:
        return simulate_paths(x, m, scheme, max_t, n_paths, seed, upper=lvl, workers=workers)
    return simulate_paths(x, m, scheme, max_t, n_paths, seed, lower=lvl, workers=workers)


def simulate_escape(x: float, iv: IntervalSpec, m: DimensionlessModel,
                    scheme: SimScheme = SimScheme(), max_t: float = DEFAULT_MAX_T,
                    n_paths: int = 1, seed: int = 0, workers: int = 1) -> PassageSample:
    """Exit times from ``(a, b)`` with the exit side recorded."""
    if not iv.a < x < iv.b:
        raise DomainError(f"need a < x < b, got x={x}")
    if iv.a == 0 and m.theta >= 1.0:
        raise SingularConfigurationError("a = 0 is unattainable for theta >= 1")
    return simulate_paths(x, m, scheme, max_t, n_paths, seed,
                          lower=_level(iv.a, m, scheme.dt),
                          upper=_level(iv.b, m, scheme.dt), workers=workers)


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

def estimate_mean(sample: PassageSample | np.ndarray,
                  max_censored: float = MAX_CENSORED) -> McEstimate:
    """Sample mean and standard error of the passage time.

    Censored entries (``nan``) are dropped; if their fraction exceeds
    ``max_censored`` no estimate is given and :class:`CensoringError` is raised.
    """
    times = sample.times if isinstance(sample, PassageSample) else np.asarray(sample, float)
    cens = np.isnan(times)
    frac = float(cens.mean()) if times.size else 0.0
    if frac > max_censored:
        raise CensoringError(f"censored fraction {frac:.3g} exceeds {max_censored:g}")
    ok = times[~cens]
    if ok.size == 0:
        raise CensoringError("no uncensored samples")
    se = float(ok.std(ddof=1) / math.sqrt(ok.size)) if ok.size > 1 else 0.0
    return McEstimate(float(ok.mean()), se, int(ok.size), frac)


def empirical_cdf(sample: PassageSample, t_points) -> tuple[np.ndarray, np.ndarray]:
    """Fraction of paths that passed by each ``t`` and its binomial standard error.

    Censored paths count as not yet passed, which is exact for ``t <= max_t``.
    """
    t_points = np.asarray(t_points, dtype=float)
    done = np.sort(sample.times[~sample.censored])
    p = np.searchsorted(done, t_points, side="right") / sample.n
    return p, np.sqrt(p * (1.0 - p) / sample.n)


def empirical_laplace(sample: PassageSample, s: float) -> McEstimate:
    """Estimate ``E[exp(-s tau)]``, which equals ``s W_hat(s)``; censored paths contribute 0."""
    vals = np.where(sample.censored, 0.0, np.exp(-s * np.nan_to_num(sample.times)))
    return McEstimate(float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(vals.size)),
                      int(vals.size), sample.censored_fraction)
