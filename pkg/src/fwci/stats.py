"""Moment accumulation and standard normal special functions.

The scalar kernels ``_phi_raw`` and ``_ndtri_raw`` use only :mod:`math` so
that :mod:`fwci.kernels` can compile the very same source with numba.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, InsufficientDataError

SQRT2 = math.sqrt(2.0)
SQRT2PI = math.sqrt(2.0 * math.pi)

# Acklam's rational approximation of the normal quantile (relative error
# about 1.15e-9); refined below by one Newton step against erfc.
_P_LOW = 0.02425


def _phi_raw(x):
    return 0.5 * math.erfc(-x / 1.4142135623730951)


def _ndtri_raw(p):
    # Work in the lower half; 1 - p is exact for p >= 0.5.
    upper = p > 0.5
    q = 1.0 - p if upper else p
    if q < _P_LOW:
        t = math.sqrt(-2.0 * math.log(q))
        x = ((((((-7.784894002430293e-03 * t - 3.223964580411365e-01) * t
                 - 2.400758277161838e00) * t - 2.549732539343734e00) * t
               + 4.374664141464968e00) * t + 2.938163982698783e00)
             / ((((7.784695709041462e-03 * t + 3.224671290700398e-01) * t
                  + 2.445134137142996e00) * t + 3.754408661907416e00) * t + 1.0))
    else:
        u = q - 0.5
        r = u * u
        x = ((((((-3.969683028665376e01 * r + 2.209460984245205e02) * r
                 - 2.759285104469687e02) * r + 1.383577518672690e02) * r
               - 3.066479806614716e01) * r + 2.506628277459239e00) * u
             / (((((-5.447609879822406e01 * r + 1.615858368580409e02) * r
                   - 1.556989798598866e02) * r + 6.680131188771972e01) * r
                 - 1.328068155288572e01) * r + 1.0))
    # exp(x*x/2) overflows beyond |x| ~ 37.6
    if abs(x) < 37.0:
        err = 0.5 * math.erfc(-x / 1.4142135623730951) - q
        x = x - err * 2.5066282746310002 * math.exp(0.5 * x * x)
    return -x if upper else x


def std_normal_cdf(x: float) -> float:
    """Standard normal distribution function, ``Phi(x) = erfc(-x/sqrt 2)/2``."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"std_normal_cdf needs a finite argument, got {x!r}")
    return _phi_raw(x)


def std_normal_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / SQRT2PI


def std_normal_quantile(p: float) -> float:
    """Inverse of :func:`std_normal_cdf` on the open unit interval.

    >>> round(std_normal_quantile(0.995), 4)
    2.5758
    """
    p = float(p)
    if not (0.0 < p < 1.0):
        raise DomainError(f"probability must lie in (0, 1), got {p!r}")
    return _ndtri_raw(p)


@dataclass
class MomentAccumulator:
    """Running count, mean and sum of squared deviations (Welford).

    Accumulators merge with the pairwise update of Chan et al., so shards of
    one stream can be reduced in any grouping.
    """

    count: int = 0
    mean: float = 0.0
    sum_sq_dev: float = 0.0

    def add(self, y: float) -> "MomentAccumulator":
        y = float(y)
        if not math.isfinite(y):
            raise DomainError(f"non-finite observation {y!r}")
        self.count += 1
        delta = y - self.mean
        self.mean += delta / self.count
        self.sum_sq_dev += delta * (y - self.mean)
        return self

    def update(self, values) -> "MomentAccumulator":
        """Fold an array of observations in (vectorized; numba when enabled)."""
        from .kernels import chunk_moments

        n, mean, m2, ok = chunk_moments(values)
        if not ok:
            raise DomainError("non-finite observation in batch")
        self._merge_in(n, mean, m2)
        return self

    def _merge_in(self, n, mean, m2):
        if n == 0:
            return
        if self.count == 0:
            self.count, self.mean, self.sum_sq_dev = int(n), float(mean), float(m2)
            return
        total = self.count + n
        delta = mean - self.mean
        self.mean += delta * (n / total)
        self.sum_sq_dev += m2 + delta * delta * (self.count * (n / total))
        self.count = total

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        """Return a new accumulator equal to this stream followed by ``other``."""
        out = MomentAccumulator(self.count, self.mean, self.sum_sq_dev)
        out._merge_in(other.count, other.mean, other.sum_sq_dev)
        return out

    def variance(self) -> float:
        return sample_variance(self)


def accumulate(acc: MomentAccumulator, y: float) -> MomentAccumulator:
    return acc.add(y)


def sample_variance(acc: MomentAccumulator) -> float:
    """Unbiased sample variance ``sum_sq_dev / (count - 1)``."""
    if acc.count < 2:
        raise InsufficientDataError(f"sample variance needs at least 2 observations, got {acc.count}")
    return max(acc.sum_sq_dev, 0.0) / (acc.count - 1)


def sample_variance_var(sigma2: float, kurt: float, n: int) -> float:
    """``var(s^2_n) = sigma^4 (kurt - (n-3)/(n-1)) / n`` with ``kurt`` the modified kurtosis."""
    if n < 2:
        raise InsufficientDataError(f"need n >= 2, got {n}")
    return sigma2 * sigma2 * (kurt - (n - 3) / (n - 1)) / n


def variance_envelope(sigma2: float, kurt: float, n: int, alpha: float) -> tuple[float, float]:
    """One-sided Cantelli bounds on ``s^2_n``.

    Each of ``s^2 < hi`` and ``s^2 > lo`` holds with probability at least
    ``1 - alpha``.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    if n < 2:
        raise InsufficientDataError(f"need n >= 2, got {n}")
    half = math.sqrt(max(kurt - (n - 3) / (n - 1), 0.0) * (1.0 - alpha) / (alpha * n))
    return sigma2 * (1.0 - half), sigma2 * (1.0 + half)
