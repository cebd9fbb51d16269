"""Two-stage fixed-width Monte Carlo estimation.

Stage one draws ``n_sigma`` values and inflates their sample variance by
``inflation**2``.  Stage two sizes a fresh, independent sample from that
variance bound with the Berry-Esseen / Chebyshev rules and returns its mean.
If the modified kurtosis of Y is at most ``kappa_max(alpha_tilde, n_sigma,
inflation)`` and the budget is not hit, ``P(|mu_hat - mu| <= epsilon) >= 1 - alpha``.

A sampler is any callable ``sampler(rng, n) -> ndarray`` returning ``n`` IID
draws of Y using only the :class:`numpy.random.Generator` it is handed.
"""
from __future__ import annotations

import enum
import math
import time
from dataclasses import asdict, dataclass
from typing import Callable, Union

import numpy as np

from . import samplesize
from .errors import ConfigError, SamplerError
from .samplesize import Selector
from .stats import MomentAccumulator, sample_variance

Sampler = Callable[[np.random.Generator, int], np.ndarray]
Seed = Union[int, np.random.SeedSequence]

DEFAULT_N_MAX = 10**9


class FloorPolicy(str, enum.Enum):
    ONE = "one"
    N_SIGMA = "nsigma"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class EngineConfig:
    epsilon: float
    n_sigma: int = 8192
    inflation: float = 1.1
    alpha: float = 0.01
    n_max: int = DEFAULT_N_MAX
    floor_policy: FloorPolicy = FloorPolicy.N_SIGMA
    chunk_size: int = 1 << 16

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ConfigError(f"epsilon must be positive, got {self.epsilon!r}")
        if int(self.n_sigma) != self.n_sigma or self.n_sigma < 2:
            raise ConfigError(f"n_sigma must be an integer >= 2, got {self.n_sigma!r}")
        if not self.inflation > 1.0:
            raise ConfigError(f"inflation must exceed 1, got {self.inflation!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if self.n_sigma + 1 > self.n_max:
            raise ConfigError(f"budget n_max={self.n_max} leaves no room after n_sigma={self.n_sigma}")
        if self.chunk_size < 1:
            raise ConfigError("chunk_size must be positive")
        if self.kappa_max < 1.0:
            # every non-degenerate Y has kurtosis >= 1, so the cone would be empty
            raise ConfigError(
                f"n_sigma={self.n_sigma} with inflation={self.inflation} gives kappa_max "
                f"{self.kappa_max:.4g} < 1; raise n_sigma or the inflation"
            )
        object.__setattr__(self, "floor_policy", FloorPolicy(self.floor_policy))

    @property
    def alpha_tilde(self) -> float:
        return samplesize.alpha_tilde(self.alpha)

    @property
    def kappa_max(self) -> float:
        return samplesize.kappa_max(self.alpha_tilde, self.n_sigma, self.inflation)

    @property
    def floor(self) -> int:
        return self.n_sigma if self.floor_policy is FloorPolicy.N_SIGMA else 1


@dataclass(frozen=True)
class EstimateReport:
    mu_hat: float
    sigma_hat_sq: float
    s2: float
    kappa_max_used: float
    alpha_tilde: float
    n_sigma: int
    n_mu: int
    n_total: int
    selector: Selector
    budget_truncated: bool
    wall_time: float

    def as_dict(self):
        d = asdict(self)
        d["selector"] = str(self.selector)
        return d


def stage_streams(seed: Seed) -> tuple[np.random.Generator, np.random.Generator]:
    """Two independent generators (stage one, stage two) derived from ``seed``."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    one, two = ss.spawn(2)
    return np.random.Generator(np.random.PCG64(one)), np.random.Generator(np.random.PCG64(two))


def _stream(sampler: Sampler, rng: np.random.Generator, n: int, chunk: int) -> MomentAccumulator:
    acc = MomentAccumulator()
    left = n
    while left > 0:
        m = min(chunk, left)
        y = np.asarray(sampler(rng, m), dtype=np.float64)
        if y.shape != (m,):
            raise SamplerError(f"sampler returned shape {y.shape}, expected ({m},)")
        try:
            acc.update(y)
        except ValueError as exc:
            raise SamplerError("sampler produced a non-finite value") from exc
        left -= m
    return acc


def stage_one_variance(
    sampler: Sampler, cfg: EngineConfig, seed: Union[Seed, np.random.Generator]
) -> tuple[float, float]:
    """``(s2, sigma_hat_sq)`` from ``cfg.n_sigma`` draws.

    An integer or SeedSequence ``seed`` selects the same stage-one stream that
    :func:`run_two_stage` would use.
    """
    rng = seed if isinstance(seed, np.random.Generator) else stage_streams(seed)[0]
    acc = _stream(sampler, rng, cfg.n_sigma, cfg.chunk_size)
    s2 = sample_variance(acc)
    return s2, cfg.inflation**2 * s2


def run_two_stage(sampler: Sampler, cfg: EngineConfig, seed: Seed) -> EstimateReport:
    t0 = time.perf_counter()
    rng_var, rng_mean = stage_streams(seed)
    s2, sigma_hat_sq = stage_one_variance(sampler, cfg, rng_var)

    a_t = cfg.alpha_tilde
    k_max = cfg.kappa_max
    n_mu, selector = samplesize.n_mu(
        cfg.epsilon, math.sqrt(sigma_hat_sq), a_t, k_max**0.75, floor=cfg.floor
    )
    truncated = cfg.n_sigma + n_mu > cfg.n_max
    if truncated:
        n_mu = cfg.n_max - cfg.n_sigma

    acc = _stream(sampler, rng_mean, n_mu, cfg.chunk_size)
    return EstimateReport(
        mu_hat=acc.mean,
        sigma_hat_sq=sigma_hat_sq,
        s2=s2,
        kappa_max_used=k_max,
        alpha_tilde=a_t,
        n_sigma=cfg.n_sigma,
        n_mu=n_mu,
        n_total=cfg.n_sigma + n_mu,
        selector=selector,
        budget_truncated=truncated,
        wall_time=time.perf_counter() - t0,
    )
