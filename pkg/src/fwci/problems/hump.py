"""Single-hump test integrand on the unit cube.

    f(x) = a0 + b0 * prod_j [1 + b_j exp(-(x_j - h_j)^2 / c_j^2)],   x ~ U[0, 1]^d

Exact mean, variance and modified kurtosis come from closed-form
per-coordinate integrals of ``exp(-k (x - h)^2 / c^2)``.  Instead of raw
power sums (which cancel badly for sharp humps) the product is written as
``M * prod_j (1 + D_j)`` with independent zero-mean ``D_j`` and central
moments of the running product are carried coordinate by coordinate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..errors import DomainError

SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True, eq=False)
class HumpParams:
    a0: float
    b0: float
    b: np.ndarray
    c: np.ndarray
    h: np.ndarray
    seed: int | None = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("b", "c", "h"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=np.float64)))
        if not (self.b.shape == self.c.shape == self.h.shape) or self.b.ndim != 1:
            raise DomainError("b, c and h must be vectors of the same length d")
        if np.any(self.c <= 0):
            raise DomainError("hump widths c must be positive")

    def __eq__(self, other):
        if not isinstance(other, HumpParams):
            return NotImplemented
        return (
            self.a0 == other.a0
            and self.b0 == other.b0
            and all(np.array_equal(getattr(self, k), getattr(other, k)) for k in ("b", "c", "h"))
        )

    __hash__ = None

    @property
    def d(self) -> int:
        return int(self.b.size)

    def to_record(self) -> str:
        """Flat ``key=value`` text; floats use repr so the record round-trips."""
        vec = lambda v: ",".join(repr(float(t)) for t in v)  # noqa: E731
        lines = [
            f"d={self.d}",
            f"a0={float(self.a0)!r}",
            f"b0={float(self.b0)!r}",
            f"b={vec(self.b)}",
            f"c={vec(self.c)}",
            f"h={vec(self.h)}",
            f"seed={'' if self.seed is None else self.seed}",
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_record(cls, text: str) -> "HumpParams":
        kv = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            kv[key.strip()] = value.strip()
        vec = lambda s: np.array([float(t) for t in s.split(",")])  # noqa: E731
        p = cls(
            a0=float(kv["a0"]),
            b0=float(kv["b0"]),
            b=vec(kv["b"]),
            c=vec(kv["c"]),
            h=vec(kv["h"]),
            seed=int(kv["seed"]) if kv.get("seed") else None,
        )
        if "d" in kv and int(kv["d"]) != p.d:
            raise DomainError(f"record says d={kv['d']} but vectors have length {p.d}")
        return p


@dataclass(frozen=True)
class HumpMoments:
    mu: float
    sigma2: float
    kappa_tilde: float  # nan when sigma2 == 0

    def in_cone(self, kappa_max: float) -> bool:
        """Membership of the bounded-kurtosis cone; constants qualify trivially."""
        if self.sigma2 == 0.0:
            return True
        return self.kappa_tilde <= kappa_max


def hump_eval(p: HumpParams, x) -> np.ndarray | float:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    pts = x[None, :] if single else x
    if pts.ndim != 2 or pts.shape[1] != p.d:
        raise DomainError(f"expected points of dimension {p.d}, got shape {x.shape}")
    out = kernels.hump_values(pts, p.a0, p.b0, p.b, p.c, p.h)
    return float(out[0]) if single else out


def gauss_segment_integral(k: float, h: float, c: float) -> float:
    """``int_0^1 exp(-k (x - h)^2 / c^2) dx`` for k > 0 and h in [0, 1].

    Written as a sum of two non-negative erf terms, so no cancellation.
    """
    s = math.sqrt(k) / c
    return SQRT_PI / (2.0 * s) * (math.erf(s * (1.0 - h)) + math.erf(s * h))


def _bump_central_moments(b: float, c: float, h: float):
    """Mean and central moments 2..4 of ``1 + b g(X)`` with g the Gaussian bump."""
    i1, i2, i3, i4 = (gauss_segment_integral(k, h, c) for k in (1, 2, 3, 4))
    m = i1
    c2 = i2 - m * m
    c3 = i3 - 3.0 * m * i2 + 2.0 * m**3
    c4 = i4 - 4.0 * m * i3 + 6.0 * m * m * i2 - 3.0 * m**4
    return 1.0 + b * m, b * b * c2, b**3 * c3, b**4 * c4


def hump_exact_moments(p: HumpParams) -> HumpMoments:
    mean_prod = 1.0
    # central moments of prod_j (1 + D_j) around its mean 1
    a2 = a3 = a4 = 0.0
    for bj, cj, hj in zip(p.b, p.c, p.h):
        mj, u2, u3, u4 = _bump_central_moments(float(bj), float(cj), float(hj))
        mean_prod *= mj
        d2, d3, d4 = u2 / mj**2, u3 / mj**3, u4 / mj**4
        eb2 = 1.0 + d2
        eb3 = 1.0 + 3.0 * d2 + d3
        eb4 = 1.0 + 6.0 * d2 + 4.0 * d3 + d4
        # W = A (1 + D) + D with A, D independent and zero mean
        n2 = a2 * eb2 + d2
        n3 = a3 * eb3 + 3.0 * a2 * (2.0 * d2 + d3) + d3
        n4 = a4 * eb4 + 4.0 * a3 * (3.0 * d2 + 3.0 * d3 + d4) + 6.0 * a2 * (d2 + 2.0 * d3 + d4) + d4
        a2, a3, a4 = n2, n3, n4
    mu = p.a0 + p.b0 * mean_prod
    scale2 = (p.b0 * mean_prod) ** 2
    sigma2 = scale2 * a2
    if sigma2 == 0.0:
        return HumpMoments(mu=mu, sigma2=0.0, kappa_tilde=math.nan)
    return HumpMoments(mu=mu, sigma2=sigma2, kappa_tilde=a4 / (a2 * a2))


def hump_random_instance(
    seed: int | np.random.SeedSequence | np.random.Generator,
    d: int,
    variance_range: tuple[float, float] = (1e-2, 1e2),
) -> HumpParams:
    """Random instance with mean exactly 1 and log-uniform standard deviation.

    ``log b_j ~ U[log 0.1, log 10]``, ``log c_j ~ U[log 1e-6, 0]``,
    ``h_j ~ U[0, 1]``; ``sigma`` is log-uniform with ``sigma^2`` in
    ``variance_range``.  ``b0`` scales the product to hit that sigma and
    ``a0`` then pins the mean to 1.
    """
    if d < 1:
        raise DomainError(f"d must be >= 1, got {d}")
    rng = np.random.default_rng(seed)
    b = np.exp(rng.uniform(math.log(0.1), math.log(10.0), d))
    c = np.exp(rng.uniform(math.log(1e-6), 0.0, d))
    h = rng.uniform(0.0, 1.0, d)
    lo, hi = (0.5 * math.log(v) for v in variance_range)
    sigma = math.exp(rng.uniform(lo, hi))
    unit = hump_exact_moments(HumpParams(a0=0.0, b0=1.0, b=b, c=c, h=h))
    b0 = sigma / math.sqrt(unit.sigma2)
    a0 = 1.0 - b0 * unit.mu
    seed_tag = seed if isinstance(seed, (int, np.integer)) else None
    return HumpParams(a0=a0, b0=b0, b=b, c=c, h=h, seed=None if seed_tag is None else int(seed_tag))


class HumpSampler:
    """Engine sampler: ``f(X)`` with ``X`` uniform on the unit cube."""

    def __init__(self, params: HumpParams):
        self.params = params

    def __call__(self, rng: np.random.Generator, n: int) -> np.ndarray:
        p = self.params
        x = rng.random((n, p.d))
        return kernels.hump_values(x, p.a0, p.b0, p.b, p.c, p.h)
