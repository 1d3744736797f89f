from dataclasses import replace

import numpy as np
import pytest

from sdli.domain import (
    CostParams,
    DemandModel,
    DemandPath,
    InfoScenario,
    InventoryVector,
    LookaheadParams,
    Metrics,
    PeriodOutcome,
    PipelineState,
    ScenarioConfig,
    ShelfLifeModel,
    SupplyModel,
    ValidationError,
    validate_scenario,
)


def test_baseline_config_validates():
    cfg = validate_scenario(ScenarioConfig())
    assert cfg.tau == 3
    assert cfg.costs == CostParams(5.0, 0.1, 1.0)
    assert cfg.lookahead.N == 1000 and cfg.lookahead.nu == 3 and cfg.lookahead.rho == 0.9


def test_tpm_row_off_by_tenth_names_the_row():
    tpm = np.array([[0.99, 0.105, 0.005], [0.5, 0.4, 0.1], [0.5, 0.1, 0.4]])
    with pytest.raises(ValidationError) as exc:
        validate_scenario(ScenarioConfig(supply=SupplyModel(tpm)))
    assert str(exc.value) == "supply.tpm row 1: sums to 1.1"


def test_near_stochastic_rows_are_rescaled_exactly():
    pmf = np.array([0.05, 0.10, 0.15, 0.35, 0.20, 0.15]) * (1 + 1e-12)
    cfg = validate_scenario(ScenarioConfig(shelf_life=ShelfLifeModel(pmf)))
    assert cfg.shelf_life.pmf.sum() == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize(
    "change, path",
    [
        ({"costs": CostParams(b=-1)}, "costs.b"),
        ({"tau": -1}, "tau"),
        ({"policy": "bogus"}, "policy"),
        ({"shelf_life": ShelfLifeModel([0.5, 0.6])}, "shelf_life.pmf"),
        ({"initial_inventory": (1, 2)}, "initial_inventory"),
        ({"initial_pipeline": (1,)}, "initial_pipeline"),
        ({"lookahead": LookaheadParams(N=0)}, "lookahead.N"),
        ({"lookahead": LookaheadParams(rho=0.0)}, "lookahead.rho"),
        ({"demand": DemandModel.fixed(100, -1)}, "demand.k"),
        ({"burn_in": 5000}, "burn_in"),
    ],
)
def test_invalid_fields_are_reported(change, path):
    with pytest.raises(ValidationError) as exc:
        validate_scenario(replace(ScenarioConfig(), **change))
    assert exc.value.path == path


def test_inventory_ageing_drops_oldest():
    inv = InventoryVector([36, 2, 0, 0, 0, 7])
    assert inv.aged() == InventoryVector([0, 36, 2, 0, 0, 0])
    assert inv.total() == 45
    with pytest.raises(ValueError):
        inv.counts[0] = 1


def test_pipeline_is_a_fifo_queue():
    pipe = PipelineState((10, 20, 30))
    due, nxt = pipe.push(40)
    assert due == 10 and nxt.pending == (20, 30, 40)
    due, nxt = PipelineState.zeros(0).push(7)
    assert due == 7 and nxt.tau == 0


def test_critical_ratio():
    assert CostParams().critical_ratio() == pytest.approx(5 / 6)
    with pytest.raises(ValueError):
        CostParams(b=0, h=0).critical_ratio()


def test_info_scenarios_number_roundtrip():
    numbers = [s.number for s in InfoScenario.all()]
    assert numbers == list(range(1, 9))
    assert InfoScenario.from_number(1).all_point
    assert InfoScenario.from_number(8) == InfoScenario(True, True, True)
    assert InfoScenario.from_number(5) == InfoScenario(demand=True, shelf_life=False, supply=False)
    assert InfoScenario.from_number(3) == InfoScenario(demand=False, shelf_life=True, supply=False)
    assert InfoScenario.from_number(2) == InfoScenario(demand=False, shelf_life=False, supply=True)
    with pytest.raises(ValueError):
        InfoScenario.from_number(9)


def test_demand_path_pads_with_last_value():
    path = DemandPath(np.array([1.0, 2.0, 3.0]), np.inf)
    mu, k = path.window(2, 3)
    assert mu.tolist() == [3.0, 3.0, 3.0]
    assert np.isinf(k).all()


def test_demand_model_variance():
    assert DemandModel.nonstationary(100, 300).variance() == 400
    assert DemandModel.fixed(100, 1 / 3).variance() == pytest.approx(400)
    assert DemandModel.point(5).variance() == 0


def test_shelf_life_hazards_fill_unused_ages():
    model = ShelfLifeModel([0.5, 0.5, 0.0, 0.0])
    assert np.isnan(model.conditional[2:]).all()
    assert model.hazards.tolist() == [0.5, 1.0, 1.0, 1.0]
    assert ShelfLifeModel().mean() == pytest.approx(4.0)


def test_metrics_cost_identity():
    costs = CostParams()
    rng = np.random.default_rng(3)
    outcomes = []
    for t in range(50):
        ending, lost, z = rng.integers(0, 100, size=3)
        outcomes.append(
            PeriodOutcome(t, 1, 1, 10, 5, int(lost), int(z), int(ending), costs.v * ending + costs.b * lost + costs.h * z)
        )
    m = Metrics.from_outcomes(outcomes)
    assert m.avg_cost == pytest.approx(
        costs.v * m.avg_inventory + costs.b * m.avg_lost + costs.h * m.avg_spoilage, abs=1e-9
    )
