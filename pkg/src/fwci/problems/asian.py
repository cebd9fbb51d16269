"""Geometric-mean Asian call under geometric Brownian motion.

The discounted payoff uses the trapezoid-weighted geometric mean

    G = [sqrt(S(0)) S(T/d) ... S(T(d-1)/d) sqrt(S(T))]^(1/d)

so ``log G`` is Gaussian and the price has a closed form.  Brownian paths are
built in bridge (bisection) order so the first normals carry the coarse,
low-frequency part of the path.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .. import kernels
from ..errors import DomainError
from ..stats import std_normal_cdf


@dataclass(frozen=True)
class OptionParams:
    v: float
    d: int
    S0: float = 100.0
    K: float = 100.0
    T: float = 1.0
    r: float = 0.03

    def __post_init__(self):
        if not (self.S0 > 0 and self.K >= 0 and self.T > 0):
            raise DomainError("need S0 > 0, K >= 0 and T > 0")
        if self.v < 0:
            raise DomainError(f"volatility must be non-negative, got {self.v}")
        if int(self.d) != self.d or self.d < 1:
            raise DomainError(f"monitoring count d must be a positive integer, got {self.d}")


@lru_cache(maxsize=None)
def bridge_plan(T: float, d: int):
    """Fill order for the grid ``t_k = k T / d``, k = 1..d.

    The endpoint comes first, then interval midpoints breadth-first, so for
    d a power of two the normals are consumed in van der Corput order.  For
    other d the last level fills left to right.
    """
    t = np.arange(d + 1) * (T / d)
    target, left, right, wl, wr, sd = [], [], [], [], [], []
    # endpoint from B(0) = 0 alone
    target.append(d); left.append(0); right.append(0)
    wl.append(0.0); wr.append(0.0); sd.append(math.sqrt(T))
    queue = deque([(0, d)])
    while queue:
        lo, hi = queue.popleft()
        if hi - lo < 2:
            continue
        mid = (lo + hi) // 2
        span = t[hi] - t[lo]
        target.append(mid); left.append(lo); right.append(hi)
        wl.append((t[hi] - t[mid]) / span)
        wr.append((t[mid] - t[lo]) / span)
        sd.append(math.sqrt((t[mid] - t[lo]) * (t[hi] - t[mid]) / span))
        queue.append((lo, mid))
        queue.append((mid, hi))
    ints = [np.array(a, dtype=np.int64) for a in (target, left, right)]
    floats = [np.array(a, dtype=np.float64) for a in (wl, wr, sd)]
    for a in ints + floats:
        a.flags.writeable = False
    return (*ints, *floats)


def brownian_bridge_path(T: float, d: int, z) -> np.ndarray:
    """``B(T/d), ..., B(T)`` from ``d`` standard normals (bridge order).

    Accepts one vector or an ``(n, d)`` batch.
    """
    z = np.asarray(z, dtype=np.float64)
    single = z.ndim == 1
    zz = z[None, :] if single else z
    if zz.ndim != 2 or zz.shape[1] != d:
        raise DomainError(f"expected {d} normals per path, got shape {z.shape}")
    out = kernels.bridge_fill(zz, bridge_plan(float(T), int(d)))[:, 1:]
    return out[0] if single else out


def _trapezoid_weights(d: int) -> np.ndarray:
    w = np.ones(d)
    w[-1] = 0.5
    return w


def _log_mean_terms(p: OptionParams):
    """``lin`` and ``coef`` with ``log G = lin + coef . B(t_1..t_d)``."""
    d = int(p.d)
    t = np.arange(1, d + 1) * (p.T / d)
    w = _trapezoid_weights(d)
    lin = math.log(p.S0) + (p.r - 0.5 * p.v * p.v) * float(w @ t) / d
    coef = p.v * w / d
    return lin, coef


def option_payoff(p: OptionParams, z) -> np.ndarray | float:
    """Discounted payoff for one vector (or an ``(n, d)`` batch) of normals."""
    z = np.asarray(z, dtype=np.float64)
    single = z.ndim == 1
    zz = z[None, :] if single else z
    if zz.ndim != 2 or zz.shape[1] != p.d:
        raise DomainError(f"expected {p.d} normals per path, got shape {z.shape}")
    lin, coef = _log_mean_terms(p)
    out = kernels.asian_payoffs(zz, bridge_plan(float(p.T), int(p.d)), coef, lin, p.K, math.exp(-p.r * p.T))
    return float(out[0]) if single else out


def log_mean_distribution(p: OptionParams) -> tuple[float, float]:
    """Mean and variance of ``log G``."""
    d = int(p.d)
    t = np.arange(1, d + 1) * (p.T / d)
    w = _trapezoid_weights(d)
    m = math.log(p.S0) + (p.r - 0.5 * p.v * p.v) * float(w @ t) / d
    # Var(sum w_k B(t_k)) = sum_jk w_j w_k min(t_j, t_k)
    cov = np.minimum.outer(t, t)
    s2 = (p.v / d) ** 2 * float(w @ cov @ w)
    return m, s2


def option_exact_price(p: OptionParams) -> float:
    """Closed-form price: lognormal call on ``G`` discounted at ``r``."""
    m, s2 = log_mean_distribution(p)
    disc = math.exp(-p.r * p.T)
    if s2 <= 0.0:
        return max(math.exp(m) - p.K, 0.0) * disc
    if p.K == 0.0:
        return math.exp(m + 0.5 * s2) * disc
    s = math.sqrt(s2)
    d1 = (m - math.log(p.K) + s2) / s
    return disc * (math.exp(m + 0.5 * s2) * std_normal_cdf(d1) - p.K * std_normal_cdf(d1 - s))


def open_uniforms(rng: np.random.Generator, shape) -> np.ndarray:
    """Uniforms on the open interval (0, 1): ``(k + 1/2) / 2**52``."""
    k = rng.integers(0, 1 << 52, size=shape, dtype=np.int64)
    return (k + 0.5) * 2.0**-52


class AsianSampler:
    """Engine sampler: uniforms -> normals by inverse CDF -> bridge -> payoff."""

    def __init__(self, params: OptionParams):
        self.params = params
        self._plan = bridge_plan(float(params.T), int(params.d))
        self._lin, self._coef = _log_mean_terms(params)
        self._disc = math.exp(-params.r * params.T)

    def __call__(self, rng: np.random.Generator, n: int) -> np.ndarray:
        z = kernels.normal_from_uniform(open_uniforms(rng, (n, self.params.d)))
        return kernels.asian_payoffs(z, self._plan, self._coef, self._lin, self.params.K, self._disc)
