"""Ordering perishable goods under uncertain demand, supply and shelf life."""
from .domain import (
    CostParams,
    DemandModel,
    DemandPath,
    InfoScenario,
    InventoryVector,
    LookaheadParams,
    Metrics,
    Models,
    PipelineState,
    RetailerBenchmarkParams,
    ScenarioConfig,
    ShelfLifeModel,
    SimulationState,
    SupplyModel,
    ValidationError,
    validate_scenario,
)
from .simulator import (
    Environment,
    build_policy,
    generate_environment,
    run_eviu_grid,
    run_sensitivity,
    run_simulation,
)

__version__ = "0.1.0"
