"""Fitting demand, shelf-life and supply models from sales history."""
from __future__ import annotations

import csv
import datetime as dt
import logging
import warnings
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import optimize, special

from .domain import (
    DEFAULT_MAX_SHELF_LIFE,
    FULL,
    NO_DELIVERY,
    PARTIAL,
    DemandModel,
    ShelfLifeModel,
    SupplyModel,
)
from .stochastic import pmf_from_conditional

log = logging.getLogger(__name__)

HISTORY_COLUMNS = ("date", "demand", "ordered", "delivered", "spoiled", "closed_flag")


class EstimationError(ValueError):
    pass


class DegenerateModelError(EstimationError):
    pass


class InsufficientHistoryError(EstimationError):
    pass


class HistoryFormatError(EstimationError):
    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


@dataclass(frozen=True)
class HistoryRecord:
    """One day of one SKU.

    ``ordered`` and ``delivered`` refer to the delivery due on ``date``;
    ``demand`` is uncensored and may be missing (None).
    """

    date: dt.date
    demand: Optional[int]
    ordered: int
    delivered: int
    spoiled: int
    closed: bool = False

    def __post_init__(self):
        for name in ("ordered", "delivered", "spoiled"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.demand is not None and self.demand < 0:
            raise ValueError("demand must be >= 0")
        if self.delivered > self.ordered:
            raise ValueError(f"delivered {self.delivered} exceeds ordered {self.ordered}")

    @property
    def delivery_fraction(self) -> Optional[float]:
        return self.delivered / self.ordered if self.ordered > 0 else None


def _parse_int(value: str, name: str, row: int, optional: bool = False):
    value = value.strip()
    if value == "" and optional:
        return None
    try:
        out = int(value)
    except ValueError:
        try:
            f = float(value)
        except ValueError:
            raise HistoryFormatError(row, f"{name}={value!r} is not a number") from None
        if not f.is_integer():
            raise HistoryFormatError(row, f"{name}={value!r} is not an integer")
        out = int(f)
    return out


def read_history_csv(path) -> list[HistoryRecord]:
    """Read a history CSV with columns ``date,demand,ordered,delivered,spoiled,closed_flag``.

    Row numbers in errors count the header as row 1.
    """
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in HISTORY_COLUMNS if c not in (reader.fieldnames or ())]
        if missing:
            raise HistoryFormatError(1, f"missing columns {missing}")
        for i, raw in enumerate(reader, start=2):
            if None in raw.values() or None in raw:
                raise HistoryFormatError(i, "wrong number of fields")
            try:
                date = dt.date.fromisoformat(raw["date"].strip())
            except ValueError:
                raise HistoryFormatError(i, f"bad date {raw['date']!r}") from None
            flag = raw["closed_flag"].strip().lower()
            if flag not in ("0", "1", "true", "false", ""):
                raise HistoryFormatError(i, f"bad closed_flag {raw['closed_flag']!r}")
            try:
                rec = HistoryRecord(
                    date=date,
                    demand=_parse_int(raw["demand"], "demand", i, optional=True),
                    ordered=_parse_int(raw["ordered"], "ordered", i),
                    delivered=_parse_int(raw["delivered"], "delivered", i),
                    spoiled=_parse_int(raw["spoiled"], "spoiled", i),
                    closed=flag in ("1", "true"),
                )
            except ValueError as exc:
                if isinstance(exc, HistoryFormatError):
                    raise
                raise HistoryFormatError(i, str(exc)) from None
            if records and rec.date <= records[-1].date:
                raise HistoryFormatError(i, "dates must be strictly increasing")
            records.append(rec)
    if not records:
        raise InsufficientHistoryError("history file has no rows")
    return records


def write_history_csv(records: Iterable[HistoryRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HISTORY_COLUMNS)
        for r in records:
            w.writerow(
                [
                    r.date.isoformat(),
                    "" if r.demand is None else r.demand,
                    r.ordered,
                    r.delivered,
                    r.spoiled,
                    int(r.closed),
                ]
            )


# --- demand ----------------------------------------------------------------


def fit_negbinom_mle(samples: Sequence[int], min_samples: int = 10) -> DemandModel:
    """Maximum-likelihood negative binomial fit, Poisson when not overdispersed.

    In the (size, prob) form the MLE of the mean is the sample mean, so only
    the size needs a one-dimensional root search on the profile score.
    """
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise EstimationError("no demand samples")
    if x.size < min_samples:
        raise EstimationError(f"need at least {min_samples} demand samples, got {x.size}")
    if np.any(x < 0):
        raise EstimationError("demand samples must be >= 0")
    mean = float(x.mean())
    if mean == 0:
        raise DegenerateModelError("all demand samples are zero")
    if float(x.var(ddof=1)) <= mean:
        return DemandModel.fixed(mean, np.inf)

    n = x.size

    def score(log_r):
        r = np.exp(log_r)
        return float(
            special.digamma(x + r).sum() - n * special.digamma(r) + n * np.log(r / (r + mean))
        )

    lo, hi = -20.0, 5.0
    while score(hi) > 0 and hi < 40:
        hi += 5.0
    if score(hi) > 0:
        return DemandModel.fixed(mean, np.inf)
    size = float(np.exp(optimize.brentq(score, lo, hi, xtol=1e-12)))
    return DemandModel.fixed(mean, size / mean)


# --- shelf life --------------------------------------------------------------


def _normalise_pmf(counts: np.ndarray) -> np.ndarray:
    total = counts.sum()
    return counts / total


def shelf_life_from_frequencies(lifetimes: Sequence[int], J: int = DEFAULT_MAX_SHELF_LIFE) -> ShelfLifeModel:
    """Relative frequencies of observed shelf lives 1..J.

    Observations beyond ``J`` are dropped, which spreads their mass over
    1..J in proportion to the observed frequencies.
    """
    life = np.asarray(lifetimes, dtype=int)
    if np.any(life < 1):
        raise EstimationError("shelf lives must be >= 1")
    counts = np.bincount(life[life <= J], minlength=J + 1)[1:].astype(float)
    if counts.sum() == 0:
        warnings.warn("no spoilage observed; using a flat shelf-life pmf", stacklevel=2)
        return ShelfLifeModel(np.full(J, 1.0 / J))
    return ShelfLifeModel(_normalise_pmf(counts))


@dataclass(frozen=True)
class SpoilageExposure:
    """Per-age spoiled units and units at risk (stock left after sales)."""

    spoiled: np.ndarray
    at_risk: np.ndarray


def impute_spoilage_ages(records: Sequence[HistoryRecord], J: int = DEFAULT_MAX_SHELF_LIFE) -> SpoilageExposure:
    """Attribute daily spoilage totals to delivery ages.

    Stock is rebuilt from deliveries, sales are served oldest first, and
    each day's spoiled units are taken from the oldest stock. Units still
    on stock after J periods are written off as age-J spoilage.
    """
    inv = np.zeros(J + 1, dtype=np.int64)  # last slot collects overage stock
    spoiled = np.zeros(J, dtype=np.int64)
    at_risk = np.zeros(J, dtype=np.int64)
    for r in records:
        inv[0] += r.delivered
        need = r.demand if r.demand is not None else 0
        for a in range(J, -1, -1):
            take = min(inv[a], need)
            inv[a] -= take
            need -= take
        # overage stock has outlived the longest shelf life
        inv[J - 1] += inv[J]
        inv[J] = 0
        at_risk += inv[:J]
        left = r.spoiled
        for a in range(J - 1, -1, -1):
            take = min(inv[a], left)
            inv[a] -= take
            spoiled[a] += take
            left -= take
        inv[1:] = inv[:-1].copy()
        inv[0] = 0
    return SpoilageExposure(spoiled, at_risk)


def estimate_shelf_life(
    data,
    J: int = DEFAULT_MAX_SHELF_LIFE,
    method: str = "frequency",
) -> ShelfLifeModel:
    """Shelf-life pmf from spoilage data.

    ``data`` is either a sequence of observed shelf lives (``method =
    "frequency"``) or a :class:`SpoilageExposure`. With an exposure,
    ``"frequency"`` uses the relative frequencies of spoilage ages, while
    ``"hazard"`` divides spoiled by at-risk units per age, which corrects
    for units that were sold before they could spoil.
    """
    if isinstance(data, SpoilageExposure):
        if method == "frequency":
            lifetimes = np.repeat(np.arange(1, J + 1), data.spoiled[:J])
            return shelf_life_from_frequencies(lifetimes, J)
        if method != "hazard":
            raise ValueError(f"unknown method {method!r}")
        if data.spoiled.sum() == 0:
            warnings.warn("no spoilage observed; using a flat shelf-life pmf", stacklevel=2)
            return ShelfLifeModel(np.full(J, 1.0 / J))
        with np.errstate(invalid="ignore", divide="ignore"):
            p = np.where(data.at_risk > 0, data.spoiled / np.maximum(data.at_risk, 1), 0.0)
        p = np.clip(p[:J].astype(float), 0.0, 1.0)
        p[J - 1] = 1.0
        return ShelfLifeModel(_normalise_pmf(pmf_from_conditional(p)))
    if method != "frequency":
        raise ValueError("hazard estimation needs a SpoilageExposure")
    if len(data) == 0:
        warnings.warn("no spoilage observed; using a flat shelf-life pmf", stacklevel=2)
        return ShelfLifeModel(np.full(J, 1.0 / J))
    return shelf_life_from_frequencies(data, J)


# --- supply -------------------------------------------------------------------


def classify_delivery(fraction: float) -> int:
    if fraction >= 1.0:
        return FULL
    if fraction <= 0.0:
        return NO_DELIVERY
    return PARTIAL


def fit_beta_moments(fractions: Sequence[float], min_obs: int = 5, default=(2.0, 3.0)):
    """Method-of-moments Beta fit; ``default`` when data are too few or too spread."""
    x = np.asarray(fractions, dtype=float)
    if x.size < min_obs:
        return default
    m = float(x.mean())
    s2 = float(x.var(ddof=1))
    if s2 <= 0 or s2 >= m * (1 - m):
        return default
    common = m * (1 - m) / s2 - 1.0
    return m * common, (1 - m) * common


def estimate_supply_model(pairs: Sequence[tuple]) -> SupplyModel:
    """Supply chain fitted to ``(ordered, delivered)`` pairs, one per period.

    Periods without an order carry no supply information and are dropped.
    Transition counts come from consecutive informative periods; a row
    with no observations is replaced by the uniform row.
    """
    if len(pairs) < 2:
        raise EstimationError("need at least two periods of supply history")
    states, partial = [], []
    for ordered, delivered in pairs:
        if ordered <= 0:
            continue
        frac = delivered / ordered
        s = classify_delivery(frac)
        states.append(s)
        if s == PARTIAL:
            partial.append(frac)
    counts = np.zeros((3, 3))
    for a, b in zip(states[:-1], states[1:]):
        counts[a - 1, b - 1] += 1
    totals = counts.sum(axis=1)
    counts[totals == 0] += 1.0
    tpm = counts / counts.sum(axis=1, keepdims=True)
    alpha, beta = fit_beta_moments(partial)
    return SupplyModel(tpm, alpha=float(alpha), beta=float(beta))


# --- rolling windows ------------------------------------------------------------


@dataclass(frozen=True)
class Window:
    """Training months ``train`` followed by evaluation months ``evaluate``.

    Months are ``(year, month)`` tuples.
    """

    train: tuple
    evaluate: tuple

    def contains(self, which: str, date: dt.date) -> bool:
        return (date.year, date.month) in getattr(self, which)


def _month_span(first: dt.date, last: dt.date) -> list[tuple]:
    months = []
    y, m = first.year, first.month
    while (y, m) <= (last.year, last.month):
        months.append((y, m))
        y, m = (y + 1, 1) if m == 12 else (y, m + 1)
    return months


def rolling_window_plan(dates: Sequence[dt.date], train_months: int = 6, eval_months: int = 1) -> list[Window]:
    """Consecutive windows: train on ``train_months``, evaluate the next ``eval_months``."""
    if not dates:
        raise InsufficientHistoryError("insufficient history: no dates")
    months = _month_span(min(dates), max(dates))
    need = train_months + eval_months
    if len(months) < need:
        raise InsufficientHistoryError(
            f"insufficient history: {len(months)} months, need at least {need}"
        )
    plan = []
    for start in range(0, len(months) - need + 1, eval_months):
        plan.append(
            Window(
                tuple(months[start : start + train_months]),
                tuple(months[start + train_months : start + need]),
            )
        )
    return plan


@dataclass(frozen=True)
class FittedModels:
    demand: DemandModel
    supply: SupplyModel
    shelf_life: ShelfLifeModel


def fit_models(
    records: Sequence[HistoryRecord],
    J: int = DEFAULT_MAX_SHELF_LIFE,
    shelf_life_method: str = "hazard",
) -> FittedModels:
    """Fit all three models on one window of records.

    Demand uses open days with recorded demand only. Spoilage ages are
    imputed over the full window so stock carried across closed days is
    tracked.
    """
    demand = [r.demand for r in records if not r.closed and r.demand is not None]
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        shelf = estimate_shelf_life(impute_spoilage_ages(records, J), J, shelf_life_method)
    return FittedModels(
        demand=fit_negbinom_mle(demand),
        supply=estimate_supply_model([(r.ordered, r.delivered) for r in records]),
        shelf_life=shelf,
    )


def records_in(records: Sequence[HistoryRecord], months: Sequence[tuple]) -> list[HistoryRecord]:
    months = set(months)
    return [r for r in records if (r.date.year, r.date.month) in months]
