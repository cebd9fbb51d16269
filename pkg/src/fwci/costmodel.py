"""Probabilistic cost bound of the two-stage algorithm and its tuning.

With probability at least ``1 - beta`` the stage-one estimate satisfies
``sigma_hat < sigma * v``, so the total number of draws is at most

    n_up = n_sigma + N_mu(eps, sigma_max * v, alpha_tilde, kappa_max**0.75)

for every Y with variance at most ``sigma_max**2`` and kurtosis at most
``kappa_max``.  Ratios are reported against the ideal CLT size at ``alpha``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from . import samplesize as ss
from .engine import FloorPolicy
from .errors import DomainError
from .samplesize import Selector


class Regime(str, enum.Enum):
    FLOOR = "FLOOR"
    BE_NONUNIFORM = "BE_NONUNIFORM"
    BE_UNIFORM = "BE_UNIFORM"
    CHEB = "CHEB"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class CostProfile:
    sigma_over_eps: float
    n_up: int
    n_clt: int
    ratio: float
    regime: Regime
    n_sigma: int
    inflation: float
    kappa_max: float


@dataclass(frozen=True)
class OptimizedParams:
    n_sigma: int
    inflation: float
    n_up: int


def v_squared(alpha_tilde: float, beta: float, inflation: float) -> float:
    """Inflation of the variance bound that holds with probability ``1 - beta``."""
    if not (0.0 < alpha_tilde < 1.0 and 0.0 < beta < 1.0):
        raise DomainError("alpha_tilde and beta must lie in (0, 1)")
    c2 = inflation * inflation
    return c2 + (c2 - 1.0) * math.sqrt(alpha_tilde * (1.0 - beta) / ((1.0 - alpha_tilde) * beta))


def heuristic_n_sigma(kappa_max: float) -> int:
    """``n_sigma = 4000 * kappa_max``."""
    return int(math.ceil(4000 * kappa_max))


def n_up(
    epsilon: float,
    alpha: float,
    beta: float,
    kappa_max: float,
    sigma_max: float,
    n_sigma: int,
    inflation: float,
    floor_policy: FloorPolicy = FloorPolicy.N_SIGMA,
) -> CostProfile:
    a_t = ss.alpha_tilde(alpha)
    m3 = kappa_max**0.75
    sigma_up = sigma_max * math.sqrt(v_squared(a_t, beta, inflation))
    floor = n_sigma if FloorPolicy(floor_policy) is FloorPolicy.N_SIGMA else 1
    size, sel = ss.n_mu(epsilon, sigma_up, a_t, m3, floor=floor)
    if sel is Selector.FLOOR:
        regime = Regime.FLOOR
    elif sel is Selector.CHEB:
        regime = Regime.CHEB
    else:
        x = math.sqrt(size) * epsilon / sigma_up
        regime = Regime.BE_UNIFORM if ss.be_uniform_active(size, x, m3) else Regime.BE_NONUNIFORM
    total = n_sigma + size
    clt = ss.n_clt(epsilon, sigma_max, alpha)
    return CostProfile(
        sigma_over_eps=sigma_max / epsilon,
        n_up=total,
        n_clt=clt,
        ratio=total / clt,
        regime=regime,
        n_sigma=n_sigma,
        inflation=inflation,
        kappa_max=kappa_max,
    )


def _min_feasible_n_sigma(alpha_t: float, kappa_max: float) -> int:
    # kappa_max(., n, C) tends to (n-3)/(n-1) + alpha n / (1 - alpha) as C -> inf
    lo, hi = 2, 4
    while math.isinf(ss.inflation_for_kappa(alpha_t, hi, kappa_max)):
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if math.isinf(ss.inflation_for_kappa(alpha_t, mid, kappa_max)):
            lo = mid
        else:
            hi = mid
    return hi


def optimize_params(
    sigma_over_eps: float,
    alpha: float = 0.01,
    beta: float = 0.01,
    kappa_max: float = 2.0,
    grid_points: int = 48,
) -> OptimizedParams:
    """Heuristic minimizer of ``n_up`` over feasible ``(n_sigma, inflation)``.

    For fixed ``n_sigma`` the smallest feasible inflation is optimal (``n_up``
    is non-decreasing in the inflation), so the search is one-dimensional in
    ``n_sigma``: a log grid, then integer pattern search around the best
    point.  Not a certified global minimum.
    """
    if not sigma_over_eps > 0:
        raise DomainError("sigma_over_eps must be positive")
    a_t = ss.alpha_tilde(alpha)
    cache: dict[int, int] = {}

    def cost(n):
        if n not in cache:
            c = ss.inflation_for_kappa(a_t, n, kappa_max)
            cache[n] = n_up(1.0, alpha, beta, kappa_max, sigma_over_eps, n, c).n_up
        return cache[n]

    n_lo = _min_feasible_n_sigma(a_t, kappa_max)
    n_heur = max(heuristic_n_sigma(kappa_max), n_lo)
    # n_up >= n_sigma, so nothing beyond the heuristic cost can win
    n_hi = max(cost(n_heur), n_lo + 1)
    cands = {n_heur, n_lo}
    cands.update(int(round(v)) for v in np.geomspace(n_lo, n_hi, grid_points))
    best = min(cands, key=lambda n: (cost(n), n))

    step = max(1, best // 8)
    while True:
        moved = False
        for cand in (best - step, best + step):
            if n_lo <= cand and cost(cand) < cost(best):
                best, moved = cand, True
        if not moved:
            if step == 1:
                break
            step //= 2
    return OptimizedParams(best, ss.inflation_for_kappa(a_t, best, kappa_max), cost(best))


def cost_curve(
    alpha: float,
    beta: float,
    kappa_max: float,
    n_sigma_rule: Optional[Callable[[float], int]],
    grid: Iterable[float],
) -> list[CostProfile]:
    """One :class:`CostProfile` per ``sigma/epsilon`` grid point.

    ``n_sigma_rule(kappa_max) -> n_sigma`` fixes the first-stage size (the
    inflation is then the smallest one reaching ``kappa_max``); ``None``
    optimizes ``(n_sigma, inflation)`` separately at every grid point.
    """
    grid = [float(g) for g in grid]
    if not grid or min(grid) <= 0:
        raise DomainError("grid must be non-empty and positive")
    a_t = ss.alpha_tilde(alpha)
    out = []
    for r in grid:
        if n_sigma_rule is None:
            opt = optimize_params(r, alpha, beta, kappa_max)
            n_sig, infl = opt.n_sigma, opt.inflation
        else:
            n_sig = int(n_sigma_rule(kappa_max))
            infl = ss.inflation_for_kappa(a_t, n_sig, kappa_max)
            if math.isinf(infl):
                raise DomainError(f"n_sigma={n_sig} cannot reach kappa_max={kappa_max}")
        out.append(n_up(1.0, alpha, beta, kappa_max, r, n_sig, infl))
    return out


def sigma_over_eps_for_n_clt(n_clt_target: float, alpha: float) -> float:
    """``sigma/epsilon`` at which the CLT size is ``n_clt_target``."""
    return math.sqrt(n_clt_target) / ss.std_normal_quantile(1.0 - alpha / 2.0)
