"""Replenishment policies mapping a pre-decision state to an order quantity."""
from .benchmarks import (
    DeterministicPolicy,
    NewsvendorPolicy,
    RetailerBenchmarkPolicy,
    deterministic_order,
    newsvendor_order,
    retailer_benchmark_order,
)
from .lookahead import (
    LookaheadPolicy,
    PathBlock,
    apply_info_scenario,
    lookahead_objective,
    lookahead_order,
)

__all__ = [
    "DeterministicPolicy",
    "LookaheadPolicy",
    "NewsvendorPolicy",
    "PathBlock",
    "RetailerBenchmarkPolicy",
    "apply_info_scenario",
    "deterministic_order",
    "lookahead_objective",
    "lookahead_order",
    "newsvendor_order",
    "retailer_benchmark_order",
]
