"""Seeded batch experiments on the benchmark problems.

Each replication owns a 64-bit seed derived from ``(master_seed, index)``.
That one seed fixes the random problem instance and, through spawned
children, both sampling stages, so any row of a batch can be replayed with
``fwci estimate --seed <seed>``.
"""
from __future__ import annotations

import csv
import enum
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from typing import Optional

import numpy as np

from . import __version__
from .engine import DEFAULT_N_MAX, EngineConfig, FloorPolicy, run_two_stage
from .errors import ConfigError
from .problems.asian import AsianSampler, OptionParams, option_exact_price
from .problems.hump import HumpSampler, hump_exact_moments, hump_random_instance


class Problem(str, enum.Enum):
    HUMP = "hump"
    OPTION = "option"
    CONSTANT = "constant"

    def __str__(self):
        return self.value


DEFAULT_EPS = {Problem.HUMP: 1e-3, Problem.OPTION: 0.05, Problem.CONSTANT: 1e-3}
DEFAULT_D = {Problem.HUMP: "1", Problem.OPTION: "1,2,4,8,16,32", Problem.CONSTANT: "1"}

CSV_COLUMNS = [
    "id", "seed", "d", "mu_exact", "mu_hat", "abs_err", "eps", "success",
    "kappa_tilde", "guaranteed", "budget_truncated", "n_total", "selector", "wall_time_s",
]


def parse_d_spec(spec) -> tuple[int, ...]:
    """``"4"`` -> (4,), ``"2-8"`` -> (2, ..., 8), ``"1,2,4"`` -> (1, 2, 4)."""
    text = str(spec).strip()
    try:
        if "-" in text:
            lo, hi = (int(t) for t in text.split("-"))
            choices = tuple(range(lo, hi + 1))
        else:
            choices = tuple(int(t) for t in text.split(","))
    except ValueError:
        raise ConfigError(f"bad dimension spec {spec!r}") from None
    if not choices or min(choices) < 1:
        raise ConfigError(f"bad dimension spec {spec!r}")
    return choices


@dataclass(frozen=True)
class ExperimentConfig:
    problem: Problem = Problem.HUMP
    replications: int = 100
    epsilon: Optional[float] = None
    alpha: float = 0.01
    inflation: float = 1.1
    n_sigma: int = 8192
    n_max: int = DEFAULT_N_MAX
    floor_policy: FloorPolicy = FloorPolicy.N_SIGMA
    d_spec: Optional[str] = None
    master_seed: int = 0
    # option problem; None draws v uniformly from v_range per replication
    v: Optional[float] = None
    v_range: tuple[float, float] = (0.1, 0.7)
    S0: float = 100.0
    K: float = 100.0
    T: float = 1.0
    r: float = 0.03
    constant: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "problem", Problem(self.problem))
        object.__setattr__(self, "floor_policy", FloorPolicy(self.floor_policy))
        if self.epsilon is None:
            object.__setattr__(self, "epsilon", DEFAULT_EPS[self.problem])
        if self.d_spec is None:
            object.__setattr__(self, "d_spec", DEFAULT_D[self.problem])
        if int(self.replications) != self.replications or self.replications < 1:
            raise ConfigError(f"replications must be a positive integer, got {self.replications!r}")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be a 64-bit unsigned integer")
        parse_d_spec(self.d_spec)
        self.engine_config()

    def engine_config(self) -> EngineConfig:
        return EngineConfig(
            epsilon=self.epsilon,
            n_sigma=self.n_sigma,
            inflation=self.inflation,
            alpha=self.alpha,
            n_max=self.n_max,
            floor_policy=self.floor_policy,
        )

    def describe(self) -> str:
        return " ".join(f"{f.name}={getattr(self, f.name)}" for f in fields(self))


@dataclass(frozen=True)
class RunRecord:
    id: int
    seed: int
    d: int
    mu_exact: float
    mu_hat: float
    abs_err: float
    eps: float
    success: bool
    kappa_tilde: Optional[float]
    guaranteed: Optional[bool]
    budget_truncated: bool
    n_total: int
    selector: str
    wall_time_s: float

    def csv_row(self) -> list[str]:
        def b(x):
            return "" if x is None else ("1" if x else "0")

        def f(x):
            return "" if x is None or (isinstance(x, float) and math.isnan(x)) else repr(float(x))

        return [
            str(self.id), str(self.seed), str(self.d), f(self.mu_exact), f(self.mu_hat),
            f(self.abs_err), f(self.eps), b(self.success), f(self.kappa_tilde),
            b(self.guaranteed), b(self.budget_truncated), str(self.n_total), self.selector,
            f"{self.wall_time_s:.6f}",
        ]


def replication_seed(master_seed: int, index: int) -> int:
    """64-bit hash of ``(master_seed, index)``."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class ProblemInstance:
    sampler: object
    mu_exact: float
    d: int
    kappa_tilde: Optional[float]
    description: str


def build_problem(cfg: ExperimentConfig, seed: int) -> ProblemInstance:
    """Instance for ``seed``: uses the root stream of ``seed`` only."""
    rng = np.random.default_rng(seed)
    choices = parse_d_spec(cfg.d_spec)
    d = choices[0] if len(choices) == 1 else int(choices[rng.integers(len(choices))])
    if cfg.problem is Problem.HUMP:
        params = hump_random_instance(rng, d)
        params = replace(params, seed=seed)
        mom = hump_exact_moments(params)
        return ProblemInstance(HumpSampler(params), mom.mu, d, mom.kappa_tilde, params.to_record())
    if cfg.problem is Problem.OPTION:
        v = cfg.v if cfg.v is not None else float(rng.uniform(*cfg.v_range))
        params = OptionParams(v=v, d=d, S0=cfg.S0, K=cfg.K, T=cfg.T, r=cfg.r)
        return ProblemInstance(AsianSampler(params), option_exact_price(params), d, None, repr(params))
    value = float(cfg.constant)
    return ProblemInstance(
        lambda g, n: np.full(n, value), value, d, None, f"constant={value!r}"
    )


def run_replication(cfg: ExperimentConfig, index: int, seed: Optional[int] = None) -> RunRecord:
    seed = replication_seed(cfg.master_seed, index) if seed is None else seed
    inst = build_problem(cfg, seed)
    rep = run_two_stage(inst.sampler, cfg.engine_config(), seed)
    err = abs(rep.mu_hat - inst.mu_exact)
    guaranteed = None
    if cfg.problem is Problem.HUMP:
        guaranteed = bool(math.isnan(inst.kappa_tilde) or inst.kappa_tilde <= rep.kappa_max_used)
    elif cfg.problem is Problem.CONSTANT:
        guaranteed = True
    return RunRecord(
        id=index,
        seed=seed,
        d=inst.d,
        mu_exact=inst.mu_exact,
        mu_hat=rep.mu_hat,
        abs_err=err,
        eps=cfg.epsilon,
        success=err <= cfg.epsilon,
        kappa_tilde=inst.kappa_tilde,
        guaranteed=guaranteed,
        budget_truncated=rep.budget_truncated,
        n_total=rep.n_total,
        selector=str(rep.selector),
        wall_time_s=rep.wall_time,
    )


def _run_one(args):
    cfg, index = args
    return run_replication(cfg, index)


def run_bench(cfg: ExperimentConfig, workers: int = 1) -> list[RunRecord]:
    """All replications, returned in index order whatever the scheduling."""
    jobs = [(cfg, i) for i in range(cfg.replications)]
    if workers <= 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def summarize(records: list[RunRecord]) -> dict:
    n = len(records)
    errs = np.array([r.abs_err / r.eps for r in records])
    times = np.array([r.wall_time_s for r in records])
    guar = [r for r in records if r.guaranteed and not r.budget_truncated]
    qs = (0.5, 0.9, 0.99, 1.0)
    return {
        "replications": n,
        "success_rate": sum(r.success for r in records) / n,
        "guaranteed_rows": len(guar),
        "guaranteed_success_rate": (sum(r.success for r in guar) / len(guar)) if guar else float("nan"),
        "truncated": sum(r.budget_truncated for r in records),
        **{f"err_over_eps_q{q:g}": float(np.quantile(errs, q)) for q in qs},
        **{f"time_s_q{q:g}": float(np.quantile(times, q)) for q in qs},
    }


def format_csv(cfg: ExperimentConfig, records: list[RunRecord], summary: dict) -> str:
    """CSV text: config comment header, one row per record, summary footer.

    The footer omits timing so equal seeds give equal files apart from the
    ``wall_time_s`` column.
    """
    buf = io.StringIO()
    buf.write(f"# fwci {__version__} bench\n")
    buf.write(f"# config {cfg.describe()}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rec in records:
        w.writerow(rec.csv_row())
    for k, v in summary.items():
        if not k.startswith("time_"):
            buf.write(f"# summary {k}={v!r}\n")
    return buf.getvalue()


def read_records(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = [line for line in fh if not line.startswith("#")]
    return list(csv.DictReader(rows))
