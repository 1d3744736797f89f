"""Monte Carlo stochastic lookahead policy.

At each decision epoch the policy freezes N sample paths of demand,
delivered fractions and spoilage uniforms over the periods t .. t+tau+nu,
then searches the order vector (r_t, ..., r_{t+nu}) minimising the average
path cost of periods t+tau .. t+tau+nu, with period t+tau+j weighted
rho**j. Only the first component is placed. Because the paths are frozen,
every candidate vector is scored on the same randomness.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .. import _kernels
from ..domain import CostParams, InfoScenario, LookaheadParams, Models, SimulationState
from ..optimizer import NmOptions, nelder_mead
from ..rng import RngStream, Tag
from ..stochastic import sample_negbinom, sample_supply_paths
from .benchmarks import deterministic_order


def apply_info_scenario(models: Models, info: InfoScenario) -> Models:
    """Replace each source flagged as point forecast by its expectation."""
    return replace(
        models,
        demand=models.demand if info.demand else models.demand.as_point_forecast(),
        supply=replace(models.supply, point_forecast_mode=not info.supply),
        shelf_life=replace(models.shelf_life, point_forecast_mode=not info.shelf_life),
    )


@dataclass(frozen=True)
class PathBlock:
    """Frozen randomness of one decision, shaped (paths, periods[, ages])."""

    demand: np.ndarray
    frac: np.ndarray
    spoil_u: np.ndarray
    hazards: np.ndarray
    expected_spoilage: bool
    inv_tau: np.ndarray  # per-path stock at the start of period t + tau
    tau: int

    @property
    def n_paths(self) -> int:
        return self.demand.shape[0]


def sample_paths(state: SimulationState, models: Models, params: LookaheadParams, seed: int, run: int = 0) -> PathBlock:
    tau = state.pipeline.tau
    periods = tau + params.nu + 1
    n = 1 if params.info.all_point else params.N
    J = state.inventory.J
    stream = RngStream(seed, run=run, period=state.t)

    mu, k = models.demand.window(state.t, periods)
    if models.demand.deterministic:
        demand = np.tile(np.floor(mu + 0.5), (n, 1))
    else:
        g = stream.at(tag=Tag.LOOKAHEAD_DEMAND).generator()
        demand = sample_negbinom(g, mu, k, size=(n, periods)).astype(float)

    supply = models.supply
    if supply.point_forecast_mode:
        frac = np.full((n, periods), 1.0 - supply.mean_shortage())
    else:
        frac = sample_supply_paths(supply, state.last_supply_state, n, periods, stream)

    hazards = models.shelf_life.hazards
    expected = models.shelf_life.point_forecast_mode
    if expected:
        spoil_u = np.zeros((n, periods, J))
    else:
        spoil_u = stream.at(tag=Tag.LOOKAHEAD_SPOILAGE).uniform((n, periods, J))

    inv_tau = _kernels.lead_time_states(
        state.inventory.counts.astype(float),
        np.asarray(state.pipeline.pending, dtype=float),
        demand,
        frac,
        spoil_u,
        hazards,
        expected,
    )
    return PathBlock(demand, frac, spoil_u, hazards, expected, inv_tau, tau)


def lookahead_objective(
    state: SimulationState,
    params: LookaheadParams,
    costs: CostParams,
    seed: int = 0,
    run: int = 0,
) -> tuple[Callable[[np.ndarray], float], PathBlock]:
    """Sample-average cost as a function of the order vector, plus its paths."""
    models = apply_info_scenario(state.models, params.info)
    block = sample_paths(state, models, params, seed, run)
    weights = params.rho ** np.arange(params.nu + 1, dtype=float)
    closed = np.array(
        [state.is_closed(state.t + block.tau + j) for j in range(params.nu + 1)]
    )

    def f(r) -> float:
        r = np.asarray(r, dtype=float).copy()
        r[closed] = 0.0
        return _kernels.lookahead_cost(
            r,
            block.inv_tau,
            block.demand,
            block.frac,
            block.spoil_u,
            block.hazards,
            block.expected_spoilage,
            block.tau,
            weights,
            costs.b,
            costs.v,
            costs.h,
        )

    return f, block


def _warm_start(state: SimulationState, params: LookaheadParams) -> np.ndarray:
    """Deterministic-policy order for r_t, mean demand grossed up for later ones."""
    theta_bar = state.models.supply.mean_shortage()
    tau = state.pipeline.tau
    mu, _ = state.models.demand.window(state.t + tau, params.nu + 1)
    x0 = mu / max(1.0 - theta_bar, 1e-9)
    x0[0] = deterministic_order(state, theta_bar) if theta_bar < 1 else mu[0]
    return x0


def lookahead_order(
    state: SimulationState,
    params: LookaheadParams,
    costs: CostParams,
    seed: int = 0,
    run: int = 0,
    details: bool = False,
):
    """Order quantity r_{t,t+tau} of the stochastic lookahead policy."""
    if state.is_closed(state.t + state.pipeline.tau):
        return (0, None) if details else 0
    f, _ = lookahead_objective(state, params, costs, seed, run)
    dim = params.nu + 1
    opts = NmOptions(
        fatol=params.nm_fatol,
        xatol=params.nm_xatol,
        max_evals=params.nm_max_evals_per_dim * dim,
    )
    result = nelder_mead(f, _warm_start(state, params), opts)
    order = max(int(np.floor(result.x[0] + 0.5)), 0)
    return (order, result) if details else order


class LookaheadPolicy:
    name = "lookahead"

    def __init__(self, params: LookaheadParams, costs: CostParams, seed: int = 0, run: int = 0):
        self.params = params
        self.costs = costs
        self.seed = seed
        self.run = run

    def __call__(self, state: SimulationState) -> int:
        return lookahead_order(state, self.params, self.costs, self.seed, self.run)
