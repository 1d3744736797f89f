import math
from dataclasses import replace

import numpy as np
import pytest

from sdli.domain import (
    CostParams,
    DemandPath,
    InfoScenario,
    InventoryVector,
    LookaheadParams,
    Models,
    PipelineState,
    RetailerBenchmarkParams,
    ShelfLifeModel,
    SimulationState,
    SupplyModel,
)
from sdli.policies import (
    DeterministicPolicy,
    NewsvendorPolicy,
    RetailerBenchmarkPolicy,
    apply_info_scenario,
    deterministic_order,
    lookahead_objective,
    lookahead_order,
    newsvendor_order,
    retailer_benchmark_order,
)
from sdli.stochastic import negbinom_quantile

from oracles import grid_search_first_order

COSTS = CostParams()
FULL_SUPPLY = SupplyModel(np.array([[1.0, 0, 0], [1.0, 0, 0], [1.0, 0, 0]]))


def make_state(inv=(0,) * 6, pending=(0, 0, 0), mu=100.0, k=1 / 3, supply=None, shelf=None, closed=None, t=0):
    path = DemandPath(np.full(50, mu), k)
    models = Models(path, supply or SupplyModel(), shelf or ShelfLifeModel())
    return SimulationState(t, InventoryVector(inv), 0, PipelineState(tuple(pending)), models, closed)


# --- newsvendor ------------------------------------------------------------


def test_newsvendor_is_critical_quantile():
    assert newsvendor_order(100, 1 / 3, COSTS) == negbinom_quantile(100, 1 / 3, 5 / 6)
    assert newsvendor_order(100, 1 / 3, COSTS, deterministic=True) == 100
    assert newsvendor_order(0, 1 / 3, COSTS) == 0
    assert newsvendor_order(100, 1 / 3, CostParams(b=0)) == 0


def test_newsvendor_ignores_stock():
    policy = NewsvendorPolicy(COSTS)
    assert policy(make_state()) == policy(make_state(inv=(0, 500, 0, 0, 0, 0), pending=(90, 90, 90)))


# --- deterministic -----------------------------------------------------------


def test_deterministic_order_from_empty_state():
    state = make_state()
    theta_bar = SupplyModel().mean_shortage()
    assert deterministic_order(state) == round(100 / (1 - theta_bar))


def test_deterministic_order_by_hand():
    # full supply, no spoilage for three periods: stock at t+3 is 250 + 3*50 - 3*100 = 100
    shelf = ShelfLifeModel([0, 0, 0, 0, 0, 1.0])
    state = make_state(inv=(0, 250, 0, 0, 0, 0), pending=(50, 50, 50), supply=FULL_SUPPLY, shelf=shelf)
    assert deterministic_order(state) == 0
    state = make_state(inv=(0, 150, 0, 0, 0, 0), pending=(50, 50, 50), supply=FULL_SUPPLY, shelf=shelf)
    assert deterministic_order(state) == 100


def test_deterministic_order_rejects_zero_supply():
    state = make_state(supply=SupplyModel(np.array([[0, 1.0, 0], [0, 1.0, 0], [0, 1.0, 0]])))
    with pytest.raises(ZeroDivisionError):
        deterministic_order(state)


# --- retailer ------------------------------------------------------------------


def test_retailer_orders_up_to_safety_level():
    assert retailer_benchmark_order(make_state(), RetailerBenchmarkParams(0.5, 2)) == 150
    # 120 one-period-old units: 100 are sold in period t, the remaining 20 expire
    state = make_state(inv=(0, 120, 0, 0, 0, 0), pending=(0, 0, 0))
    assert retailer_benchmark_order(state, RetailerBenchmarkParams(0.5, 3)) == 150
    # stock in the pipeline that is still fresh at t + tau counts
    state = make_state(pending=(0, 0, 100))
    assert retailer_benchmark_order(state, RetailerBenchmarkParams(0.5, 2)) == 150
    state = make_state(pending=(0, 200, 200))
    assert retailer_benchmark_order(state, RetailerBenchmarkParams(0.5, 2)) == 0


def test_retailer_zero_lead_time():
    state = make_state(inv=(0, 30, 0, 0, 0, 0), pending=())
    assert retailer_benchmark_order(state, RetailerBenchmarkParams(0.3, 1)) == 130
    assert retailer_benchmark_order(state, RetailerBenchmarkParams(0.3, 2)) == 100


# --- closed days -----------------------------------------------------------------


def test_all_policies_skip_closed_delivery_days():
    closed = np.zeros(50, dtype=bool)
    closed[3] = True
    state = make_state(closed=closed)
    params = LookaheadParams(N=50)
    assert NewsvendorPolicy(COSTS)(state) == 0
    assert DeterministicPolicy()(state) == 0
    assert RetailerBenchmarkPolicy()(state) == 0
    assert lookahead_order(state, params, COSTS) == 0
    assert lookahead_order(replace(state, t=1), params, COSTS) > 0


# --- lookahead -----------------------------------------------------------------


def test_info_scenario_switches_sources_to_means():
    models = make_state().models
    m1 = apply_info_scenario(models, InfoScenario.from_number(1))
    assert m1.demand.deterministic and m1.supply.point_forecast_mode and m1.shelf_life.point_forecast_mode
    m8 = apply_info_scenario(models, InfoScenario.from_number(8))
    assert not (m8.demand.deterministic or m8.supply.point_forecast_mode or m8.shelf_life.point_forecast_mode)


def test_objective_uses_frozen_paths():
    f, block = lookahead_objective(make_state(), LookaheadParams(N=200), COSTS, seed=3)
    x = np.array([110.0, 100.0, 100.0, 100.0])
    assert f(x) == f(x)
    assert block.demand.shape == (200, 7)
    g, _ = lookahead_objective(make_state(), LookaheadParams(N=200), COSTS, seed=3)
    assert g(x) == f(x)


def test_lookahead_is_reproducible():
    state = make_state(inv=(0, 40, 30, 0, 0, 0), pending=(90, 100, 110))
    params = LookaheadParams(N=300)
    assert lookahead_order(state, params, COSTS, seed=1) == lookahead_order(state, params, COSTS, seed=1)


def test_lookahead_improves_its_own_sample_objective():
    state = make_state(inv=(0, 40, 30, 0, 0, 0), pending=(90, 100, 110))
    params = LookaheadParams(N=300)
    order, res = lookahead_order(state, params, COSTS, seed=2, details=True)
    f, _ = lookahead_objective(state, params, COSTS, seed=2)
    assert res.fun <= f(np.full(4, 100.0)) + 1e-9
    assert res.fun <= f(res.x * np.array([0.9, 1, 1, 1])) + 1e-9
    assert order == max(int(math.floor(res.x[0] + 0.5)), 0)


@pytest.mark.parametrize("seed", range(10))
def test_degenerate_lookahead_is_the_newsvendor(seed):
    """Zero lead time, one-period horizon, one-period shelf life, sure supply."""
    mu, k = 100.0, 1 / 3
    state = make_state(
        pending=(), mu=mu, k=k, supply=FULL_SUPPLY, shelf=ShelfLifeModel([1.0, 0, 0, 0, 0, 0])
    )
    params = LookaheadParams(N=4000, nu=0)
    order = lookahead_order(state, params, COSTS, seed=seed)
    assert abs(order - negbinom_quantile(mu, k, COSTS.critical_ratio())) <= 2


@pytest.mark.parametrize("case", range(10))
def test_point_forecast_lookahead_matches_grid_search(case):
    rng = np.random.default_rng(100 + case)
    inv = tuple(int(x) for x in rng.integers(0, 40, size=6))
    pending = tuple(int(x) for x in rng.integers(40, 140, size=3))
    state = make_state(inv=inv, pending=pending, mu=float(rng.integers(60, 140)))
    params = LookaheadParams(nu=1, info=InfoScenario.from_number(1))
    order = lookahead_order(state, params, COSTS)

    assert abs(order - grid_search_first_order(state, params.rho, COSTS)) <= 1
