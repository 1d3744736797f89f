"""Simulation harness and experiment suites."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .domain import (
    UNKNOWN_SUPPLY_STATE,
    CostParams,
    DemandPath,
    InfoScenario,
    InventoryVector,
    Metrics,
    Models,
    PipelineState,
    ScenarioConfig,
    ShelfLifeModel,
    SimulationState,
    SupplyModel,
    validate_scenario,
)
from .dynamics import advance_period
from .policies import (
    DeterministicPolicy,
    LookaheadPolicy,
    NewsvendorPolicy,
    RetailerBenchmarkPolicy,
)
from .rng import RngStream, Tag
from .stochastic import (
    binomial_inverse_cdf,
    draw_demand_parameters,
    next_supply_state,
    sample_delivery_fraction,
    sample_negbinom,
)

log = logging.getLogger(__name__)


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Environment:
    """One realisation of all exogenous randomness for T periods.

    Spoilage is stored as one uniform per (period, age) and turned into
    counts through the binomial inverse CDF, so every policy run against
    the same environment sees comonotone spoilage.
    """

    forecast: DemandPath  # demand distribution per period, known to the planner
    demand: np.ndarray
    supply_state: np.ndarray
    fraction: np.ndarray
    spoil_u: np.ndarray
    closed: np.ndarray

    @property
    def periods(self) -> int:
        return len(self.demand)


def generate_environment(config: ScenarioConfig, periods: int, seed: int, run: int = 0) -> Environment:
    """Draw demand, supply and spoilage randomness period by period.

    Each period uses its own stream addresses, so a longer horizon extends
    a shorter one without changing it.
    """
    pad = config.tau + config.lookahead.nu + 1
    total = periods + pad
    J = config.shelf_life.J
    d = config.demand
    closed = np.array(
        [t % 7 in config.closed_weekdays for t in range(total)], dtype=bool
    )

    mu = np.empty(total)
    k = np.empty(total)
    for t in range(total):
        if d.kind == "negbinom_nonstationary":
            mu[t], k[t] = draw_demand_parameters(d, RngStream(seed, run=run, period=t))
        else:
            mu[t], k[t] = d.mu, d.k
    mu[closed] = 0.0
    forecast = DemandPath(mu, k, deterministic=d.kind == "point_forecast")

    demand = np.empty(periods, dtype=np.int64)
    states = np.empty(periods, dtype=np.int64)
    fraction = np.empty(periods)
    spoil_u = np.empty((periods, J))
    prev = UNKNOWN_SUPPLY_STATE
    for t in range(periods):
        s = RngStream(seed, run=run, period=t)
        if forecast.deterministic:
            demand[t] = int(np.floor(mu[t] + 0.5))
        else:
            demand[t] = int(sample_negbinom(s.at(tag=Tag.DEMAND).generator(), mu[t], k[t]))
        prev = next_supply_state(prev, config.supply.tpm, s)
        states[t] = prev
        fraction[t] = sample_delivery_fraction(prev, config.supply.alpha, config.supply.beta, s)
        spoil_u[t] = s.at(tag=Tag.SPOILAGE).uniform(J)
    return Environment(forecast, demand, states, fraction, spoil_u, closed)


def build_policy(config: ScenarioConfig, name: Optional[str] = None, seed: int = 0, run: int = 0):
    name = name or config.policy
    if name == "newsvendor":
        return NewsvendorPolicy(config.costs)
    if name == "deterministic":
        return DeterministicPolicy()
    if name == "retailer":
        return RetailerBenchmarkPolicy(config.retailer)
    if name == "lookahead":
        return LookaheadPolicy(config.lookahead, config.costs, seed=seed, run=run)
    raise ValueError(f"unknown policy {name!r}")


def initial_state(config: ScenarioConfig, models: Models, closed=None) -> SimulationState:
    J = config.shelf_life.J
    inv = (
        InventoryVector(np.asarray(config.initial_inventory, dtype=np.int64))
        if config.initial_inventory is not None
        else InventoryVector.empty(J)
    )
    pipe = (
        PipelineState(tuple(int(x) for x in config.initial_pipeline))
        if config.initial_pipeline is not None
        else PipelineState.zeros(config.tau)
    )
    return SimulationState(0, inv, UNKNOWN_SUPPLY_STATE, pipe, models, closed)


def run_simulation(
    config: ScenarioConfig,
    policy: Optional[Callable[[SimulationState], int]] = None,
    periods: Optional[int] = None,
    seed: Optional[int] = None,
    environment: Optional[Environment] = None,
    run: int = 0,
) -> Metrics:
    """Simulate ``periods`` periods of ``policy`` against one environment.

    Each period: the policy orders for t + tau, then supply, demand and
    spoilage realise and the dynamics advance. The first ``burn_in``
    periods are simulated but left out of the metrics.
    """
    config = validate_scenario(config)
    periods = periods if periods is not None else config.periods
    seed = config.seed if seed is None else seed
    if policy is None:
        policy = build_policy(config, seed=seed, run=run)
    env = environment or generate_environment(config, periods, seed, run)
    if env.periods < periods:
        raise SimulationError(f"environment covers {env.periods} < {periods} periods")

    models = Models(env.forecast, config.supply, config.shelf_life)
    hazards = config.shelf_life.hazards
    state = initial_state(config, models, env.closed)
    outcomes = []
    for t in range(periods):
        try:
            order = int(policy(state))
        except Exception as exc:
            raise SimulationError(f"policy failed in period {t}: {exc}") from exc
        if state.is_closed(t + config.tau):
            order = 0
        u = env.spoil_u[t]
        state, outcome = advance_period(
            state,
            order,
            env.fraction[t],
            int(env.demand[t]),
            lambda counts: binomial_inverse_cdf(u, counts, hazards),
            config.costs,
            supply_state=int(env.supply_state[t]),
        )
        outcomes.append(outcome)
    return Metrics.from_outcomes(outcomes[config.burn_in :])


# --- experiment suites -----------------------------------------------------


def _run_cell(args):
    config, policy_name, periods, seed, run = args
    env = generate_environment(config, periods, seed, run)
    policy = build_policy(config, policy_name, seed=seed, run=run)
    return run_simulation(config, policy, periods, seed, environment=env, run=run)


def _map(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def scenario_config(config: ScenarioConfig, info: InfoScenario) -> ScenarioConfig:
    return replace(config, policy="lookahead", lookahead=replace(config.lookahead, info=info))


METRIC_NAMES = ("avg_order", "avg_inventory", "avg_spoilage", "fill_rate", "avg_cost")


def run_eviu_grid(
    config: ScenarioConfig,
    periods: Optional[int] = None,
    seed: Optional[int] = None,
    scenarios: Sequence[int] = tuple(range(1, 9)),
    jobs: int = 1,
    run: int = 0,
) -> list[dict]:
    """Lookahead under each information scenario on one shared environment."""
    config = validate_scenario(config)
    periods = periods or config.periods
    seed = config.seed if seed is None else seed
    cells = [
        (scenario_config(config, InfoScenario.from_number(n)), "lookahead", periods, seed, run)
        for n in scenarios
    ]
    results = _map(_run_cell, cells, jobs)
    rows = []
    for n, m in zip(scenarios, results):
        info = InfoScenario.from_number(n)
        rows.append(
            {
                "scenario": n,
                "demand": info.demand,
                "shelf_life": info.shelf_life,
                "supply": info.supply,
                **{name: getattr(m, name) for name in METRIC_NAMES},
            }
        )
    return rows


# Alternative shelf-life pmfs; the first one is rescaled to sum to one.
SHELF_LIFE_SETS = {
    "f1": np.array([0.0, 0.1, 0.25, 0.7, 0.05, 0.0]) / 1.1,
    "f2": np.array([0.2, 0.05, 0.05, 0.25, 0.15, 0.3]),
    "f3": np.array([0.4, 0.4, 0.075, 0.075, 0.025, 0.025]),
    "f4": np.array([0.025, 0.025, 0.075, 0.075, 0.4, 0.4]),
}

# Alternative supply chains; the last row of theta2 is rescaled to sum to one.
SUPPLY_TPMS = {
    "theta1": np.array([[0.95, 0.01, 0.04], [0.3, 0.2, 0.5], [0.3, 0.5, 0.2]]),
    "theta2": np.array([[0.8, 0.199, 0.001], [0.199, 0.8, 0.001], [0.495, 0.495, 0.001]])
    / np.array([[1.0], [1.0], [0.991]]),
    "theta3": np.array([[0.9, 0.05, 0.05], [0.05, 0.9, 0.05], [0.05, 0.05, 0.9]]),
    "theta4": np.full((3, 3), 1.0 / 3.0),
}

SWEEPS = {
    "demand_variance": {"values": (100, 200, 400, 500), "scenarios": (1, 8)},
    "shelf_life_sets": {"values": tuple(SHELF_LIFE_SETS), "scenarios": (1, 3, 8)},
    "supply_tpms": {"values": tuple(SUPPLY_TPMS), "scenarios": (1, 2, 8)},
    "cost_asymmetry": {"values": (0.1, 0.5, 1.0, 2.0, 10.0), "scenarios": (1, 8)},
}


def sweep_config(config: ScenarioConfig, sweep: str, value) -> ScenarioConfig:
    if sweep == "demand_variance":
        d = config.demand
        return replace(config, demand=type(d).nonstationary(d.lambda_mu or d.mu, float(value)))
    if sweep == "shelf_life_sets":
        return replace(config, shelf_life=ShelfLifeModel(SHELF_LIFE_SETS[value]))
    if sweep == "supply_tpms":
        return replace(config, supply=replace(config.supply, tpm=SUPPLY_TPMS[value]))
    if sweep == "cost_asymmetry":
        return replace(config, costs=replace(config.costs, b=float(value)))
    raise ValueError(f"unknown sweep {sweep!r}")


def run_sensitivity(
    sweep: str,
    config: ScenarioConfig,
    periods: Optional[int] = None,
    seed: Optional[int] = None,
    values: Optional[Sequence] = None,
    scenarios: Optional[Sequence[int]] = None,
    jobs: int = 1,
) -> list[dict]:
    """One row per (sweep value, scenario, metric), ready for plotting."""
    if sweep not in SWEEPS:
        raise ValueError(f"unknown sweep {sweep!r}; choose from {sorted(SWEEPS)}")
    spec = SWEEPS[sweep]
    values = tuple(values) if values is not None else spec["values"]
    scenarios = tuple(scenarios) if scenarios is not None else spec["scenarios"]
    config = validate_scenario(config)
    periods = periods or config.periods
    seed = config.seed if seed is None else seed
    cells, keys = [], []
    for value in values:
        base = validate_scenario(sweep_config(config, sweep, value))
        for n in scenarios:
            cells.append((scenario_config(base, InfoScenario.from_number(n)), "lookahead", periods, seed, 0))
            keys.append((value, n))
    results = _map(_run_cell, cells, jobs)
    rows = []
    for (value, n), m in zip(keys, results):
        for name in METRIC_NAMES:
            rows.append(
                {"sweep": sweep, "sweep_value": value, "scenario": n, "metric": name, "value": getattr(m, name)}
            )
    return rows


def sweep_costs(rows: Sequence[dict]) -> dict:
    """``{(sweep_value, scenario): avg_cost}`` from :func:`run_sensitivity` rows."""
    return {
        (r["sweep_value"], r["scenario"]): r["value"] for r in rows if r["metric"] == "avg_cost"
    }
