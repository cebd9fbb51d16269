"""Sample sizes for a fixed-width interval ``P(|mu - mu_hat| <= eps) >= 1 - alpha``.

All sizes depend on ``(epsilon, sigma)`` only through ``sigma / epsilon``.
``m3`` is a bound on the scaled third absolute central moment
``E|Y - mu|^3 / sigma^3``; the two-stage engine passes ``kappa_max ** 0.75``.
"""
from __future__ import annotations

import enum
import math

from .errors import DomainError
from .stats import _phi_raw, std_normal_quantile

# Berry-Esseen constants: uniform bound A1*(M3 + A2), non-uniform bound A3*M3/(1 + |x|^3).
A1 = 0.3328
A2 = 0.429
A3 = 18.1139

#: returned by :func:`n_be` when no n below 2**63 satisfies the bound
N_SATURATED = 2**63 - 1

_CEIL_SLACK = 1e-9


class Selector(str, enum.Enum):
    FLOOR = "FLOOR"
    CHEB = "CHEB"
    BE = "BE"

    def __str__(self):
        return self.value


def _ceil(x: float) -> int:
    # exact integers must not round up through floating-point noise
    return math.ceil(x - _CEIL_SLACK * abs(x))


def _check_alpha(alpha):
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")


def _check_eps_sigma(epsilon, sigma):
    if not (epsilon > 0.0 and math.isfinite(epsilon)):
        raise DomainError(f"epsilon must be positive and finite, got {epsilon!r}")
    if not (sigma >= 0.0 and math.isfinite(sigma)):
        raise DomainError(f"sigma must be non-negative and finite, got {sigma!r}")


def alpha_tilde(alpha: float) -> float:
    """Per-stage uncertainty with ``(1 - alpha_tilde)**2 == 1 - alpha``."""
    _check_alpha(alpha)
    # 1 - sqrt(1 - a) without cancellation for small a
    return alpha / (1.0 + math.sqrt(1.0 - alpha))


def kappa_max(alpha: float, n_sigma: int, inflation: float) -> float:
    """Largest modified kurtosis for which ``inflation**2 * s^2`` over-estimates
    the variance with probability at least ``1 - alpha`` (via Cantelli)."""
    _check_alpha(alpha)
    if n_sigma < 2:
        raise DomainError(f"n_sigma must be >= 2, got {n_sigma!r}")
    if not inflation > 1.0:
        raise DomainError(f"inflation factor must exceed 1, got {inflation!r}")
    shrink = 1.0 - 1.0 / (inflation * inflation)
    return (n_sigma - 3) / (n_sigma - 1) + (alpha * n_sigma / (1.0 - alpha)) * shrink * shrink


def inflation_for_kappa(alpha: float, n_sigma: int, kappa_target: float) -> float:
    """Smallest inflation factor C with ``kappa_max(alpha, n_sigma, C) >= kappa_target``.

    Returns ``inf`` when no finite C works for this ``n_sigma``.
    """
    _check_alpha(alpha)
    if n_sigma < 2:
        raise DomainError(f"n_sigma must be >= 2, got {n_sigma!r}")
    base = (n_sigma - 3) / (n_sigma - 1)
    excess = kappa_target - base
    if excess <= 0.0:
        return 1.0
    t = excess * (1.0 - alpha) / (alpha * n_sigma)
    if t >= 1.0:
        return math.inf
    c = 1.0 / math.sqrt(1.0 - math.sqrt(t))
    # closed form can land a hair short after rounding
    while kappa_max(alpha, n_sigma, c) < kappa_target:
        c = math.nextafter(c, math.inf)
    return c


def min_n_sigma(kappa_target: float, alpha: float, inflation: float) -> int:
    """Smallest ``n_sigma >= 2`` with ``kappa_max(alpha, n_sigma, inflation) >= kappa_target``."""
    if not kappa_target > 1.0:
        raise DomainError(f"kappa target must exceed 1, got {kappa_target!r}")

    def ok(n):
        return kappa_max(alpha, n, inflation) >= kappa_target

    if ok(2):
        return 2
    lo, hi = 2, 4
    while not ok(hi):
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    assert ok(hi) and not ok(hi - 1)
    return hi


def n_clt(epsilon: float, sigma: float, alpha: float) -> int:
    """CLT sample size ``ceil((z_{alpha/2} sigma / epsilon)^2)``."""
    _check_eps_sigma(epsilon, sigma)
    _check_alpha(alpha)
    if sigma == 0.0:
        return 1
    z = std_normal_quantile(1.0 - alpha / 2.0)
    return max(1, _ceil((z * sigma / epsilon) ** 2))


def n_cheb(epsilon: float, sigma: float, alpha: float) -> int:
    """Chebyshev sample size ``ceil(sigma^2 / (alpha epsilon^2))``, at least 1."""
    _check_eps_sigma(epsilon, sigma)
    _check_alpha(alpha)
    return max(1, _ceil((sigma / epsilon) ** 2 / alpha))


def be_delta(n: int, x: float, m3: float) -> float:
    """Berry-Esseen bound on ``|P(standardized mean < x) - Phi(x)|``."""
    ax = abs(x)
    return min(A1 * (m3 + A2), A3 * m3 / (1.0 + ax * ax * ax)) / math.sqrt(n)


def be_uniform_active(n: int, x: float, m3: float) -> bool:
    """True when the uniform branch of :func:`be_delta` attains the minimum."""
    ax = abs(x)
    return A1 * (m3 + A2) <= A3 * m3 / (1.0 + ax * ax * ax)


def be_tail(n: int, ratio: float, m3: float) -> float:
    """``Phi(-sqrt(n) r) + Delta_n(sqrt(n) r, m3)`` with ``r = epsilon / sigma``.

    Half the guaranteed non-coverage probability of an ``n``-sample mean;
    strictly decreasing in ``n``.
    """
    x = math.sqrt(n) * ratio
    return _phi_raw(-x) + be_delta(n, x, m3)


def n_be(epsilon: float, sigma: float, alpha: float, m3: float) -> int:
    """Smallest n with ``be_tail(n, epsilon/sigma, m3) <= alpha / 2``.

    Doubling bracket then bisection; the predicate is monotone in n.
    """
    _check_eps_sigma(epsilon, sigma)
    _check_alpha(alpha)
    if not m3 >= 1.0:
        raise DomainError(f"m3 must be >= 1, got {m3!r}")
    if sigma == 0.0:
        return 1
    ratio = epsilon / sigma
    half = alpha / 2.0

    def ok(n):
        return be_tail(n, ratio, m3) <= half

    if ok(1):
        return 1
    lo, hi = 1, 2
    while not ok(hi):
        if hi >= N_SATURATED:
            return N_SATURATED
        lo, hi = hi, min(hi * 2, N_SATURATED)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def n_mu(epsilon: float, sigma: float, alpha: float, m3: float, floor: int = 1) -> tuple[int, Selector]:
    """``max(floor, min(n_cheb, n_be))`` and which term is active.

    ``floor=1`` is the plain second-stage rule; ``floor=n_sigma`` is the
    costlier rule that also covers any variance below ``eps^2 alpha n_sigma``.
    Ties resolve FLOOR, then CHEB, then BE.
    """
    if floor < 1:
        raise DomainError(f"floor must be >= 1, got {floor!r}")
    nc = n_cheb(epsilon, sigma, alpha)
    nb = n_be(epsilon, sigma, alpha, m3)
    inner = min(nc, nb)
    if floor >= inner:
        return int(floor), Selector.FLOOR
    if nc <= nb:
        return nc, Selector.CHEB
    return nb, Selector.BE
