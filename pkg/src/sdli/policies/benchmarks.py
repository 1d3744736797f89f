"""Newsvendor, deterministic point-forecast and retailer rule-of-thumb policies."""
from __future__ import annotations

import numpy as np

from ..domain import CostParams, RetailerBenchmarkParams, SimulationState
from ..dynamics import deterministic_rollforward, expected_starting_inventory
from ..stochastic import negbinom_quantile


def _round(x: float) -> int:
    return max(int(np.floor(x + 0.5)), 0)


def newsvendor_order(mu: float, k: float, costs: CostParams, deterministic: bool = False) -> int:
    """Critical-ratio quantile of the target period's demand.

    Inventory on hand, the pipeline, shelf life and supply risk are all
    ignored: every unit is assumed to be sellable for one period only.
    """
    ratio = costs.critical_ratio()
    if ratio == 0 or mu <= 0:
        return 0
    if deterministic:
        return _round(mu)
    return negbinom_quantile(mu, k, ratio)


def _shortage(state: SimulationState) -> float:
    supply = state.models.supply
    theta_bar = supply.mean_shortage()
    if theta_bar >= 1.0:
        raise ZeroDivisionError("mean supplied fraction is zero; deterministic order undefined")
    return theta_bar


def deterministic_order(state: SimulationState, theta_bar: float | None = None) -> int:
    """Order the gap between expected demand and expected stock at delivery.

    Expected stock comes from rolling the current state forward with every
    random quantity at its mean; the gap is scaled up by the mean supplied
    fraction.
    """
    tau = state.pipeline.tau
    target = state.t + tau
    if state.is_closed(target):
        return 0
    if theta_bar is None:
        theta_bar = _shortage(state)
    elif theta_bar >= 1.0:
        raise ZeroDivisionError("mean supplied fraction is zero; deterministic order undefined")
    mus, _ = state.models.demand.window(state.t, tau + 1)
    stock = expected_starting_inventory(
        state.inventory.counts,
        state.pipeline.pending,
        mus[:tau],
        state.models.shelf_life.hazards,
        1.0 - theta_bar,
    )
    return _round(max((mus[tau] - stock) / (1.0 - theta_bar), 0.0))


def retailer_benchmark_order(state: SimulationState, params: RetailerBenchmarkParams) -> int:
    """Order up to mean demand plus a fixed safety share of it.

    The projected position assumes a fixed shelf life of
    ``params.sales_periods`` and deliveries at ``params.yield_rate`` of
    each pending order.
    """
    tau = state.pipeline.tau
    target = state.t + tau
    if state.is_closed(target):
        return 0
    mus, _ = state.models.demand.window(state.t, tau + 1)
    counts = np.asarray(state.inventory.counts, dtype=float)
    J = max(len(counts), params.sales_periods)
    padded = np.zeros(J)
    padded[: len(counts)] = counts
    # units leave at the end of their sales_periods-th period
    hazards = np.zeros(J)
    hazards[params.sales_periods - 1 :] = 1.0
    profile = deterministic_rollforward(
        padded, state.pipeline.pending, mus[:tau], hazards, params.yield_rate
    )
    stock = float(profile[: params.sales_periods].sum())
    level = (1.0 + params.safety_pct) * mus[tau]
    return _round(max(level - stock, 0.0) / params.yield_rate)


class NewsvendorPolicy:
    name = "newsvendor"

    def __init__(self, costs: CostParams):
        self.costs = costs

    def __call__(self, state: SimulationState) -> int:
        target = state.t + state.pipeline.tau
        if state.is_closed(target):
            return 0
        mu, k = state.models.demand.window(target, 1)
        return newsvendor_order(
            float(mu[0]), float(k[0]), self.costs, state.models.demand.deterministic
        )


class DeterministicPolicy:
    name = "deterministic"

    def __init__(self):
        self._cache = {}

    def __call__(self, state: SimulationState) -> int:
        supply = state.models.supply
        key = (supply.tpm.tobytes(), supply.alpha, supply.beta)
        if key not in self._cache:
            self._cache[key] = supply.mean_shortage()
        return deterministic_order(state, self._cache[key])


class RetailerBenchmarkPolicy:
    name = "retailer"

    def __init__(self, params: RetailerBenchmarkParams = RetailerBenchmarkParams()):
        self.params = params

    def __call__(self, state: SimulationState) -> int:
        return retailer_benchmark_order(state, self.params)
