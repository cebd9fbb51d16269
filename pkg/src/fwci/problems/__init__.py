"""Benchmark problem families with exact answers."""
from .asian import (
    AsianSampler,
    OptionParams,
    bridge_plan,
    brownian_bridge_path,
    option_exact_price,
    option_payoff,
)
from .hump import (
    HumpMoments,
    HumpParams,
    HumpSampler,
    hump_eval,
    hump_exact_moments,
    hump_random_instance,
)

__all__ = [
    "AsianSampler",
    "HumpMoments",
    "HumpParams",
    "HumpSampler",
    "OptionParams",
    "bridge_plan",
    "brownian_bridge_path",
    "hump_eval",
    "hump_exact_moments",
    "hump_random_instance",
    "option_exact_price",
    "option_payoff",
]
