import math
from dataclasses import replace

import numpy as np
import pytest

from fwci import samplesize as ss
from fwci.engine import (
    EngineConfig,
    FloorPolicy,
    run_two_stage,
    stage_one_variance,
    stage_streams,
)
from fwci.errors import ConfigError, SamplerError
from fwci.samplesize import Selector
from fwci.stats import variance_envelope


def uniform(rng, n):
    return rng.random(n)


def const(value):
    return lambda rng, n: np.full(n, value)


class Counting:
    def __init__(self, inner):
        self.inner = inner
        self.calls = 0
        self.draws = 0

    def __call__(self, rng, n):
        self.calls += 1
        self.draws += n
        return self.inner(rng, n)


@pytest.mark.parametrize("policy,expected", [(FloorPolicy.ONE, 1), (FloorPolicy.N_SIGMA, 8192)])
def test_constant_sampler(policy, expected):
    cfg = EngineConfig(epsilon=1e-3, floor_policy=policy)
    rep = run_two_stage(const(3.25), cfg, seed=1)
    assert rep.s2 == 0.0 and rep.sigma_hat_sq == 0.0
    assert rep.mu_hat == 3.25
    assert rep.n_mu == expected and rep.selector is Selector.FLOOR
    assert stage_one_variance(const(3.25), cfg, 1) == (0.0, 0.0)


def test_report_consistent_with_samplesize():
    cfg = EngineConfig(epsilon=1e-2, alpha=0.01)
    rep = run_two_stage(uniform, cfg, seed=99)
    assert rep.n_total == rep.n_sigma + rep.n_mu
    assert rep.sigma_hat_sq == pytest.approx(1.21 * rep.s2, rel=1e-15)
    again = ss.n_mu(cfg.epsilon, math.sqrt(rep.sigma_hat_sq), rep.alpha_tilde,
                    rep.kappa_max_used**0.75, floor=cfg.n_sigma)
    assert again == (rep.n_mu, rep.selector)
    assert rep.kappa_max_used == pytest.approx(2.2428, abs=1e-4)
    assert abs(rep.mu_hat - 0.5) < 5e-3


def test_deterministic_apart_from_time():
    cfg = EngineConfig(epsilon=5e-3)
    a = run_two_stage(uniform, cfg, seed=2**40 + 7).as_dict()
    b = run_two_stage(uniform, cfg, seed=2**40 + 7).as_dict()
    a.pop("wall_time"), b.pop("wall_time")
    assert a == b
    c = run_two_stage(uniform, cfg, seed=2**40 + 8).as_dict()
    assert c["mu_hat"] != a["mu_hat"]


def test_draw_accounting():
    s = Counting(uniform)
    cfg = EngineConfig(epsilon=2e-3, chunk_size=1000)
    rep = run_two_stage(s, cfg, seed=5)
    assert s.draws == rep.n_total
    assert s.calls == math.ceil(rep.n_sigma / 1000) + math.ceil(rep.n_mu / 1000)


def test_stages_use_independent_streams():
    one, two = stage_streams(17)
    assert not np.array_equal(one.random(8), two.random(8))
    one_again, _ = stage_streams(17)
    assert np.array_equal(stage_streams(17)[0].random(8), one_again.random(8))


def test_chunking_does_not_change_result():
    base = EngineConfig(epsilon=5e-3)
    a = run_two_stage(uniform, base, seed=3)
    b = run_two_stage(uniform, replace(base, chunk_size=777), seed=3)
    assert a.n_mu == b.n_mu
    assert a.mu_hat == pytest.approx(b.mu_hat, rel=1e-13)


@pytest.mark.parametrize("c", [0.25, 8.0, 2.0**-20])
def test_scale_equivariance(c):
    cfg = EngineConfig(epsilon=1e-2)
    a = run_two_stage(uniform, cfg, seed=8)
    b = run_two_stage(lambda rng, n: c * rng.random(n), replace(cfg, epsilon=c * 1e-2), seed=8)
    assert (a.n_mu, a.selector) == (b.n_mu, b.selector)
    assert b.mu_hat == c * a.mu_hat
    assert b.s2 == c * c * a.s2


def test_budget_truncation():
    cfg = EngineConfig(epsilon=1e-5, n_max=50_000)
    rep = run_two_stage(uniform, cfg, seed=1)
    assert rep.budget_truncated
    assert rep.n_total == 50_000 and rep.n_mu == 50_000 - 8192


def test_no_truncation_flag_when_it_fits():
    rep = run_two_stage(uniform, EngineConfig(epsilon=1e-2), seed=1)
    assert not rep.budget_truncated


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(epsilon=0.0),
        dict(epsilon=float("inf")),
        dict(epsilon=0.1, n_sigma=1),
        dict(epsilon=0.1, n_sigma=100.5),
        dict(epsilon=0.1, inflation=1.0),
        dict(epsilon=0.1, alpha=1.0),
        dict(epsilon=0.1, n_sigma=10_000, n_max=10_000),
        dict(epsilon=0.1, n_sigma=100),  # kappa_max below 1
        dict(epsilon=0.1, chunk_size=0),
    ],
)
def test_config_errors(kwargs):
    with pytest.raises(ConfigError):
        EngineConfig(**kwargs)


def test_sampler_non_finite():
    def bad(rng, n):
        y = rng.random(n)
        y[-1] = np.nan
        return y

    with pytest.raises(SamplerError):
        run_two_stage(bad, EngineConfig(epsilon=0.1), seed=0)


def test_sampler_wrong_shape():
    with pytest.raises(SamplerError):
        run_two_stage(lambda rng, n: rng.random((n, 2)), EngineConfig(epsilon=0.1), seed=0)


def test_small_coverage_smoke():
    # quick version of the full coverage check in the acceptance suite
    a_t = ss.alpha_tilde(0.05)
    cfg = EngineConfig(epsilon=0.05, alpha=0.05, n_sigma=ss.min_n_sigma(2.0, a_t, 1.1))
    sampler = lambda rng, n: 2.0 * (rng.random(n) < 0.5) - 1.0  # noqa: E731
    fails = sum(abs(run_two_stage(sampler, cfg, seed=s).mu_hat) > 0.05 for s in range(200))
    assert fails / 200 <= 0.05 + 3 * math.sqrt(0.05 * 0.95 / 200)


def test_stage_one_over_estimates():
    a_t = ss.alpha_tilde(0.01)
    cfg = EngineConfig(epsilon=1.0, n_sigma=10_000)
    reps = 2000
    hits = sum(stage_one_variance(uniform, cfg, s)[1] > 1 / 12 for s in range(reps))
    assert hits / reps >= 1 - a_t - 3 * math.sqrt(a_t * (1 - a_t) / reps)


def test_stage_one_below_envelope():
    a_t = ss.alpha_tilde(0.01)
    cfg = EngineConfig(epsilon=1.0, n_sigma=10_000)
    _, hi = variance_envelope(1.0, 3.0, cfg.n_sigma, a_t)
    reps = 1000
    normal = lambda rng, n: rng.standard_normal(n)  # noqa: E731
    hits = sum(stage_one_variance(normal, cfg, s)[0] < hi for s in range(reps))
    assert hits / reps >= 1 - a_t - 3 * math.sqrt(a_t * (1 - a_t) / reps)
