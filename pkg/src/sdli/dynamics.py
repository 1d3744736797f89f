"""Period-by-period inventory transition.

Within period t the events are: place the new order, receive the delivery
due now into the youngest bucket, serve demand oldest-first, spoil units
bucket by bucket, then age every bucket by one period.
"""
from __future__ import annotations

from dataclasses import replace
from typing import Callable, Union

import numpy as np

from .domain import (
    CostParams,
    InventoryVector,
    PeriodOutcome,
    SimulationState,
)


class DynamicsError(RuntimeError):
    pass


def fulfill_fifo(counts, demand):
    """Serve ``demand`` from the oldest bucket first.

    Returns ``(remaining_counts, sold, lost)``; works for integer and
    fractional counts alike.
    """
    inv = np.array(counts, copy=True)
    remaining = demand
    for age in range(len(inv) - 1, -1, -1):
        if remaining <= 0:
            break
        take = min(inv[age], remaining)
        inv[age] -= take
        remaining -= take
    sold = demand - remaining
    return inv, sold, remaining


def period_cost(costs: CostParams, ending, lost, spoiled) -> float:
    return costs.v * ending + costs.b * lost + costs.h * spoiled


def delivered_quantity(due: int, supply_fraction: float) -> int:
    return int(np.floor(supply_fraction * due + 0.5))


SpoilageRule = Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]


def advance_period(
    state: SimulationState,
    order: int,
    supply_fraction: float,
    demand: int,
    spoilage: SpoilageRule,
    costs: CostParams,
    supply_state: int = 0,
):
    """Run one period of the event sequence.

    ``spoilage`` is either the per-age spoiled counts, or a function mapping
    the post-sale counts to them (spoilage depends on what is left after
    sales). Returns ``(next_state, outcome)``.
    """
    if order < 0:
        raise DynamicsError(f"negative order {order} in period {state.t}")
    due, pipeline = state.pipeline.push(order)
    delivered = delivered_quantity(due, supply_fraction)
    if not 0 <= delivered <= due:
        raise DynamicsError(f"delivered {delivered} outside [0, {due}]")

    counts = state.inventory.counts.copy()
    counts[0] += delivered
    counts, sold, lost = fulfill_fifo(counts, demand)

    spoiled = spoilage(counts) if callable(spoilage) else spoilage
    spoiled = np.asarray(spoiled, dtype=np.int64)
    if spoiled.shape != counts.shape:
        raise DynamicsError(f"spoilage shape {spoiled.shape} != inventory {counts.shape}")
    if np.any(spoiled < 0) or np.any(spoiled > counts):
        raise DynamicsError(
            f"period {state.t}: spoilage {spoiled.tolist()} exceeds stock {counts.tolist()}"
        )
    end_counts = counts - spoiled
    z = int(spoiled.sum())
    ending = int(end_counts.sum())

    outcome = PeriodOutcome(
        t=state.t,
        order=int(order),
        delivered=delivered,
        demand=int(demand),
        sold=int(sold),
        lost=int(lost),
        spoiled=z,
        ending=ending,
        cost=period_cost(costs, ending, lost, z),
    )
    next_state = replace(
        state,
        t=state.t + 1,
        inventory=InventoryVector(end_counts).aged(),
        last_supply_state=supply_state or state.last_supply_state,
        pipeline=pipeline,
    )
    return next_state, outcome


def deterministic_rollforward(counts, pending, demand_means, hazards, supply_fraction=1.0):
    """Expected age profile at the start of period t + len(pending).

    Every random quantity is replaced by its expectation: demand by its
    mean, deliveries by ``supply_fraction * order`` and spoilage by the
    expected share ``hazards[age]`` of each bucket. Units stay fractional.
    """
    inv = np.asarray(counts, dtype=float).copy()
    hazards = np.asarray(hazards, dtype=float)
    for due, mu in zip(pending, demand_means):
        inv[0] += supply_fraction * due
        inv, _, _ = fulfill_fifo(inv, mu)
        inv = inv * (1.0 - hazards)
        inv[1:] = inv[:-1].copy()
        inv[0] = 0.0
    return inv


def expected_starting_inventory(counts, pending, demand_means, hazards, supply_fraction=1.0) -> float:
    return float(
        deterministic_rollforward(counts, pending, demand_means, hazards, supply_fraction).sum()
    )
