"""Guaranteed fixed-width confidence intervals for Monte Carlo means."""
from .engine import EngineConfig, EstimateReport, FloorPolicy, run_two_stage, stage_one_variance
from .samplesize import Selector, kappa_max, min_n_sigma, n_be, n_cheb, n_clt, n_mu
from .stats import MomentAccumulator, sample_variance, std_normal_cdf, std_normal_quantile

__version__ = "0.1.0"

__all__ = [
    "EngineConfig",
    "EstimateReport",
    "FloorPolicy",
    "MomentAccumulator",
    "Selector",
    "kappa_max",
    "min_n_sigma",
    "n_be",
    "n_cheb",
    "n_clt",
    "n_mu",
    "run_two_stage",
    "sample_variance",
    "stage_one_variance",
    "std_normal_cdf",
    "std_normal_quantile",
]
