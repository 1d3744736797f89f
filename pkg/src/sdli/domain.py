"""Value types shared across the package.

All types are immutable after construction; numpy arrays held by them are
flagged read-only so they can be shared between workers without copying.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

DEFAULT_MAX_SHELF_LIFE = 6

# Supply states of the delivery Markov chain.
FULL, NO_DELIVERY, PARTIAL = 1, 2, 3
UNKNOWN_SUPPLY_STATE = 0


class ValidationError(ValueError):
    """Raised when a configuration violates a type invariant.

    ``path`` names the offending field, e.g. ``supply.tpm[1]``.
    """

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class InventoryVector:
    """On-hand units by age; ``counts[j]`` were supplied ``j`` periods ago."""

    counts: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "counts", _frozen(self.counts, np.int64))

    @classmethod
    def empty(cls, max_shelf_life: int = DEFAULT_MAX_SHELF_LIFE) -> "InventoryVector":
        return cls(np.zeros(max_shelf_life, dtype=np.int64))

    @property
    def J(self) -> int:
        return len(self.counts)

    def total(self) -> int:
        return int(self.counts.sum())

    def aged(self) -> "InventoryVector":
        """Shift every bucket one period older, dropping the oldest."""
        out = np.zeros_like(self.counts)
        out[1:] = self.counts[:-1]
        return InventoryVector(out)

    def __eq__(self, other):
        if not isinstance(other, InventoryVector):
            return NotImplemented
        return np.array_equal(self.counts, other.counts)

    def __hash__(self):
        return hash(self.counts.tobytes())


@dataclass(frozen=True)
class CostParams:
    b: float = 5.0  # lost sales, per unit
    v: float = 0.1  # holding, per unit carried to the next period
    h: float = 1.0  # spoilage, per unit

    def critical_ratio(self) -> float:
        if self.b + self.h <= 0:
            raise ValueError("critical ratio undefined for b + h = 0")
        return self.b / (self.b + self.h)


@dataclass(frozen=True)
class DemandModel:
    """Negative binomial demand, parameterised by mean ``mu`` and ``k``.

    ``k`` follows the mean/variance relation ``var = mu + mu / k``, so that
    ``k = mu / (var - mu)``. ``k = inf`` is the Poisson limit.

    Kinds:
      * ``negbinom_fixed``: every period uses (mu, k).
      * ``negbinom_nonstationary``: per period, ``mu_t ~ Pois(lambda_mu)`` and
        the excess variance ``kappa_t ~ Pois(lambda_kappa)``.
      * ``point_forecast``: demand equals ``mu`` with certainty.
    """

    kind: str = "negbinom_fixed"
    mu: float = 100.0
    k: float = np.inf
    lambda_mu: float = 0.0
    lambda_kappa: float = 0.0

    KINDS = ("negbinom_fixed", "negbinom_nonstationary", "point_forecast")

    @classmethod
    def fixed(cls, mu: float, k: float) -> "DemandModel":
        return cls("negbinom_fixed", mu=float(mu), k=float(k))

    @classmethod
    def nonstationary(cls, lambda_mu: float, lambda_kappa: float) -> "DemandModel":
        return cls(
            "negbinom_nonstationary",
            mu=float(lambda_mu),
            k=float(lambda_mu) / lambda_kappa if lambda_kappa > 0 else np.inf,
            lambda_mu=float(lambda_mu),
            lambda_kappa=float(lambda_kappa),
        )

    @classmethod
    def point(cls, mu: float) -> "DemandModel":
        return cls("point_forecast", mu=float(mu))

    def variance(self) -> float:
        if self.kind == "point_forecast":
            return 0.0
        if self.kind == "negbinom_nonstationary":
            return self.lambda_mu + self.lambda_kappa
        return self.mu + self.mu / self.k


@dataclass(frozen=True)
class DemandPath:
    """Per-period demand distribution parameters (the demand forecasts).

    ``mu[t]`` and ``k[t]`` describe the distribution of demand in absolute
    period ``t``. ``deterministic`` collapses every period to its mean.
    """

    mu: np.ndarray
    k: np.ndarray
    deterministic: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mu", _frozen(self.mu))
        k = np.broadcast_to(np.asarray(self.k, dtype=float), self.mu.shape)
        object.__setattr__(self, "k", _frozen(k))

    def __len__(self):
        return len(self.mu)

    def window(self, start: int, length: int):
        """(mu, k) for ``length`` periods from ``start``, padding with the last value."""
        idx = np.minimum(np.arange(start, start + length), len(self.mu) - 1)
        return self.mu[idx], self.k[idx]

    def mean(self, t: int) -> float:
        return float(self.mu[min(t, len(self.mu) - 1)])

    def as_point_forecast(self) -> "DemandPath":
        return replace(self, deterministic=True)


@dataclass(frozen=True)
class SupplyModel:
    """Three-state delivery chain: Full (1), NoDelivery (2), Partial (3).

    In the partial state the delivered fraction is Beta(alpha, beta).
    """

    tpm: np.ndarray = field(
        default_factory=lambda: np.array(
            [[0.99, 0.005, 0.005], [0.5, 0.4, 0.1], [0.5, 0.1, 0.4]]
        )
    )
    alpha: float = 2.0
    beta: float = 3.0
    point_forecast_mode: bool = False

    def __post_init__(self):
        object.__setattr__(self, "tpm", _frozen(self.tpm))

    def stationary(self) -> np.ndarray:
        from .stochastic import stationary_distribution

        return stationary_distribution(self.tpm)

    def mean_shortage(self) -> float:
        from .stochastic import mean_shortage_fraction

        return mean_shortage_fraction(self)

    def mean_partial_fraction(self) -> float:
        return self.alpha / (self.alpha + self.beta)


BASELINE_SHELF_LIFE_PMF = (0.05, 0.10, 0.15, 0.35, 0.20, 0.15)


@dataclass(frozen=True)
class ShelfLifeModel:
    """Shelf-life pmf over j = 1..J periods.

    A unit with shelf life j spoils at the end of its j-th period on stock,
    i.e. while in age bucket j - 1.
    """

    pmf: np.ndarray = field(default_factory=lambda: np.array(BASELINE_SHELF_LIFE_PMF))
    point_forecast_mode: bool = False

    def __post_init__(self):
        object.__setattr__(self, "pmf", _frozen(self.pmf))

    @property
    def J(self) -> int:
        return len(self.pmf)

    @property
    def conditional(self) -> np.ndarray:
        """Conditional spoilage probabilities; NaN where no mass remains."""
        from .stochastic import conditional_spoilage_probs

        return conditional_spoilage_probs(self.pmf)

    @property
    def hazards(self) -> np.ndarray:
        """Conditional probabilities with unused indices set to 1."""
        p = self.conditional
        return np.where(np.isnan(p), 1.0, p)

    def mean(self) -> float:
        return float(np.dot(np.arange(1, self.J + 1), self.pmf))


@dataclass(frozen=True)
class PipelineState:
    """In-transit orders; ``pending[0]`` is due in the current period."""

    pending: tuple = ()

    @classmethod
    def zeros(cls, tau: int) -> "PipelineState":
        return cls(tuple([0] * tau))

    @property
    def tau(self) -> int:
        return len(self.pending)

    def push(self, order: int):
        """Append a new order and pop the one due now.

        Returns ``(due_now, next_pipeline)``. With zero lead time the new
        order is due immediately.
        """
        queue = self.pending + (int(order),)
        return queue[0], PipelineState(queue[1:])


@dataclass(frozen=True)
class Models:
    """The stochastic models a policy plans with."""

    demand: DemandPath
    supply: SupplyModel = field(default_factory=SupplyModel)
    shelf_life: ShelfLifeModel = field(default_factory=ShelfLifeModel)


@dataclass(frozen=True)
class SimulationState:
    """Pre-decision state of one SKU at the start of period ``t``."""

    t: int
    inventory: InventoryVector
    last_supply_state: int
    pipeline: PipelineState
    models: Models
    closed: Optional[np.ndarray] = None  # per-period flag; orders for closed days are 0

    def is_closed(self, period: int) -> bool:
        if self.closed is None or period < 0 or period >= len(self.closed):
            return False
        return bool(self.closed[period])


@dataclass(frozen=True)
class PeriodOutcome:
    t: int
    order: int
    delivered: int
    demand: int
    sold: int
    lost: int
    spoiled: int
    ending: int
    cost: float


@dataclass(frozen=True)
class InfoScenario:
    """Which sources the planner sees as full distributions (True) or means."""

    demand: bool = True
    shelf_life: bool = True
    supply: bool = True

    @property
    def number(self) -> int:
        return 1 + 4 * self.demand + 2 * self.shelf_life + self.supply

    @classmethod
    def from_number(cls, n: int) -> "InfoScenario":
        if not 1 <= n <= 8:
            raise ValueError(f"scenario number must be in 1..8, got {n}")
        m = n - 1
        return cls(demand=bool(m & 4), shelf_life=bool(m & 2), supply=bool(m & 1))

    @classmethod
    def all(cls):
        return [cls.from_number(n) for n in range(1, 9)]

    @property
    def all_point(self) -> bool:
        return not (self.demand or self.shelf_life or self.supply)


@dataclass(frozen=True)
class Metrics:
    avg_order: float
    avg_inventory: float
    avg_spoilage: float
    avg_lost: float
    fill_rate: float
    avg_cost: float
    trajectory: tuple = ()

    @classmethod
    def from_outcomes(cls, outcomes: Sequence[PeriodOutcome]) -> "Metrics":
        if not outcomes:
            raise ValueError("no periods to summarise")
        arr = lambda name: np.array([getattr(o, name) for o in outcomes], dtype=float)
        demand = arr("demand").sum()
        sold = arr("sold").sum()
        return cls(
            avg_order=float(arr("order").mean()),
            avg_inventory=float(arr("ending").mean()),
            avg_spoilage=float(arr("spoiled").mean()),
            avg_lost=float(arr("lost").mean()),
            fill_rate=float(sold / demand) if demand > 0 else 1.0,
            avg_cost=float(arr("cost").mean()),
            trajectory=tuple(outcomes),
        )

    def summary(self) -> dict:
        return {
            "avg_order": self.avg_order,
            "avg_inventory": self.avg_inventory,
            "avg_spoilage": self.avg_spoilage,
            "avg_lost": self.avg_lost,
            "fill_rate": self.fill_rate,
            "avg_cost": self.avg_cost,
            "periods": len(self.trajectory),
        }


@dataclass(frozen=True)
class LookaheadParams:
    N: int = 1000
    nu: int = 3
    rho: float = 0.9
    info: InfoScenario = field(default_factory=InfoScenario)
    nm_fatol: float = 1e-2
    nm_xatol: float = 0.5
    nm_max_evals_per_dim: int = 200


@dataclass(frozen=True)
class RetailerBenchmarkParams:
    safety_pct: float = 0.5
    sales_periods: int = 2
    yield_rate: float = 1.0


# Per-SKU retailer rules used in the case study.
RETAILER_SKUS = {
    "mushrooms": RetailerBenchmarkParams(0.5, 2),
    "grapes": RetailerBenchmarkParams(0.7, 3),
    "bananas": RetailerBenchmarkParams(0.5, 2),
    "lettuce": RetailerBenchmarkParams(0.3, 1),
}

POLICIES = ("newsvendor", "deterministic", "retailer", "lookahead")


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to reproduce one experiment."""

    costs: CostParams = field(default_factory=CostParams)
    tau: int = 3
    periods: int = 5000
    demand: DemandModel = field(default_factory=lambda: DemandModel.nonstationary(100, 300))
    supply: SupplyModel = field(default_factory=SupplyModel)
    shelf_life: ShelfLifeModel = field(default_factory=ShelfLifeModel)
    policy: str = "lookahead"
    lookahead: LookaheadParams = field(default_factory=LookaheadParams)
    retailer: RetailerBenchmarkParams = field(default_factory=RetailerBenchmarkParams)
    initial_inventory: Optional[tuple] = None
    initial_pipeline: Optional[tuple] = None
    closed_weekdays: tuple = ()  # period t is closed when t % 7 is listed
    burn_in: int = 0
    seed: int = 0

    def with_(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)


def _check_stochastic_row(path, row, atol):
    if np.any(row < 0) or np.any(row > 1 + atol):
        raise ValidationError(path, "entries must lie in [0, 1]")
    s = float(row.sum())
    if abs(s - 1.0) > atol:
        raise ValidationError(path, f"sums to {s:.12g}")
    return row / s


def validate_scenario(config: ScenarioConfig, atol: float = 1e-9) -> ScenarioConfig:
    """Check every invariant; return a config with renormalised pmf/TPM.

    Rows and pmfs within ``atol`` of summing to one are rescaled exactly;
    anything further off raises :class:`ValidationError` naming the field.
    """
    c = config.costs
    for name in ("b", "v", "h"):
        val = getattr(c, name)
        if not np.isfinite(val) or val < 0:
            raise ValidationError(f"costs.{name}", "must be a non-negative number")
    if config.tau < 0:
        raise ValidationError("tau", "lead time must be >= 0")
    if config.periods < 1:
        raise ValidationError("periods", "must be >= 1")
    if config.policy not in POLICIES:
        raise ValidationError("policy", f"unknown policy {config.policy!r}")

    d = config.demand
    if d.kind not in DemandModel.KINDS:
        raise ValidationError("demand.kind", f"unknown demand kind {d.kind!r}")
    if d.kind == "negbinom_nonstationary":
        if d.lambda_mu < 0 or d.lambda_kappa < 0:
            raise ValidationError("demand.lambda", "Poisson rates must be >= 0")
    else:
        if not d.mu > 0:
            raise ValidationError("demand.mu", "mean demand must be > 0")
        if d.kind == "negbinom_fixed" and not d.k > 0:
            raise ValidationError("demand.k", "must be > 0")

    tpm = np.asarray(config.supply.tpm, dtype=float)
    if tpm.shape != (3, 3):
        raise ValidationError("supply.tpm", f"expected a 3x3 matrix, got shape {tpm.shape}")
    rows = [
        _check_stochastic_row(f"supply.tpm row {i + 1}", tpm[i], atol) for i in range(3)
    ]
    if not (config.supply.alpha > 0 and config.supply.beta > 0):
        raise ValidationError("supply.alpha/beta", "beta shape parameters must be > 0")

    pmf = np.asarray(config.shelf_life.pmf, dtype=float)
    if pmf.ndim != 1 or len(pmf) < 1:
        raise ValidationError("shelf_life.pmf", "must be a non-empty vector")
    pmf = _check_stochastic_row("shelf_life.pmf", pmf, atol)
    J = len(pmf)

    if config.initial_inventory is not None:
        inv = np.asarray(config.initial_inventory)
        if len(inv) != J or np.any(inv < 0):
            raise ValidationError(
                "initial_inventory", f"need {J} non-negative age buckets"
            )
    if config.initial_pipeline is not None:
        pipe = np.asarray(config.initial_pipeline)
        if len(pipe) != config.tau or np.any(pipe < 0):
            raise ValidationError(
                "initial_pipeline", f"need {config.tau} non-negative pending orders"
            )

    la = config.lookahead
    if la.N < 1:
        raise ValidationError("lookahead.N", "need at least one sample path")
    if la.nu < 0:
        raise ValidationError("lookahead.nu", "must be >= 0")
    if not 0 < la.rho <= 1:
        raise ValidationError("lookahead.rho", "must lie in (0, 1]")

    r = config.retailer
    if r.safety_pct < 0:
        raise ValidationError("retailer.safety_pct", "must be >= 0")
    if r.sales_periods < 1:
        raise ValidationError("retailer.sales_periods", "must be >= 1")
    if any(not 0 <= w <= 6 for w in config.closed_weekdays):
        raise ValidationError("closed_weekdays", "weekday indices must be 0..6")
    if config.burn_in < 0 or config.burn_in >= config.periods:
        raise ValidationError("burn_in", "must be in [0, periods)")

    return replace(
        config,
        supply=replace(config.supply, tpm=np.vstack(rows)),
        shelf_life=replace(config.shelf_life, pmf=pmf),
    )
