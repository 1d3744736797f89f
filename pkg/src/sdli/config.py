"""Reading and writing scenario configurations as INI files."""
from __future__ import annotations

import configparser
import math
from importlib import resources
from pathlib import Path

import numpy as np

from .domain import (
    CostParams,
    DemandModel,
    InfoScenario,
    LookaheadParams,
    RetailerBenchmarkParams,
    ScenarioConfig,
    ShelfLifeModel,
    SupplyModel,
    ValidationError,
    validate_scenario,
)


class ConfigError(ValueError):
    pass


def baseline_path() -> Path:
    return Path(str(resources.files("sdli") / "data" / "baseline.cfg"))


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(",", " ").split()]


def _ints(text: str) -> tuple:
    return tuple(int(x) for x in text.replace(",", " ").split())


def _get(cp, section, key, conv, default):
    if not cp.has_option(section, key):
        return default
    raw = cp.get(section, key)
    try:
        return conv(raw)
    except ValueError as exc:
        raise ValidationError(f"{section}.{key}", f"cannot parse {raw!r}: {exc}") from None


def _float(text: str) -> float:
    text = text.strip().lower()
    return math.inf if text in ("inf", "infinity") else float(text)


def parse_config(text: str) -> ScenarioConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    base = ScenarioConfig()

    costs = CostParams(
        b=_get(cp, "costs", "lost_sales", float, base.costs.b),
        v=_get(cp, "costs", "inventory", float, base.costs.v),
        h=_get(cp, "costs", "spoilage", float, base.costs.h),
    )

    kind = _get(cp, "demand", "kind", str.strip, "negbinom_nonstationary")
    if kind == "negbinom_nonstationary":
        demand = DemandModel.nonstationary(
            _get(cp, "demand", "lambda_mu", float, 100.0),
            _get(cp, "demand", "lambda_kappa", float, 300.0),
        )
    elif kind == "negbinom_fixed":
        demand = DemandModel.fixed(
            _get(cp, "demand", "mu", float, 100.0), _get(cp, "demand", "k", _float, math.inf)
        )
    elif kind == "point_forecast":
        demand = DemandModel.point(_get(cp, "demand", "mu", float, 100.0))
    else:
        raise ValidationError("demand.kind", f"unknown demand kind {kind!r}")

    tpm = base.supply.tpm
    if cp.has_section("supply") and any(cp.has_option("supply", f"row{i}") for i in (1, 2, 3)):
        tpm = np.array([_get(cp, "supply", f"row{i}", _floats, None) or [] for i in (1, 2, 3)], dtype=object)
        if any(len(r) != 3 for r in tpm):
            raise ValidationError("supply.tpm", "each row needs three probabilities")
        tpm = np.array(tpm.tolist(), dtype=float)
    supply = SupplyModel(
        tpm,
        alpha=_get(cp, "supply", "beta_alpha", float, base.supply.alpha),
        beta=_get(cp, "supply", "beta_beta", float, base.supply.beta),
    )

    shelf = ShelfLifeModel(np.array(_get(cp, "shelf_life", "pmf", _floats, list(base.shelf_life.pmf))))

    la = LookaheadParams(
        N=_get(cp, "lookahead", "paths", int, base.lookahead.N),
        nu=_get(cp, "lookahead", "horizon_extension", int, base.lookahead.nu),
        rho=_get(cp, "lookahead", "discount", float, base.lookahead.rho),
        info=InfoScenario.from_number(_get(cp, "lookahead", "info_scenario", int, 8)),
        nm_fatol=_get(cp, "lookahead", "nm_fatol", float, base.lookahead.nm_fatol),
        nm_xatol=_get(cp, "lookahead", "nm_xatol", float, base.lookahead.nm_xatol),
        nm_max_evals_per_dim=_get(
            cp, "lookahead", "nm_max_evals_per_dim", int, base.lookahead.nm_max_evals_per_dim
        ),
    )
    retailer = RetailerBenchmarkParams(
        safety_pct=_get(cp, "retailer", "safety_pct", float, base.retailer.safety_pct),
        sales_periods=_get(cp, "retailer", "sales_periods", int, base.retailer.sales_periods),
        yield_rate=_get(cp, "retailer", "yield_rate", float, base.retailer.yield_rate),
    )

    config = ScenarioConfig(
        costs=costs,
        tau=_get(cp, "scenario", "lead_time", int, base.tau),
        periods=_get(cp, "scenario", "periods", int, base.periods),
        demand=demand,
        supply=supply,
        shelf_life=shelf,
        policy=_get(cp, "scenario", "policy", str.strip, base.policy),
        lookahead=la,
        retailer=retailer,
        initial_inventory=_get(cp, "initial", "inventory", _ints, None) or None,
        initial_pipeline=_get(cp, "initial", "pipeline", _ints, None) or None,
        closed_weekdays=_get(cp, "scenario", "closed_weekdays", _ints, ()),
        burn_in=_get(cp, "scenario", "burn_in", int, 0),
        seed=_get(cp, "scenario", "seed", int, 0),
    )
    return validate_scenario(config)


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text())


def _fmt(x) -> str:
    return repr(float(x)) if not isinstance(x, (int, np.integer)) else str(int(x))


def dump_config(config: ScenarioConfig) -> str:
    """INI text that :func:`parse_config` turns back into ``config``."""
    d = config.demand
    lines = [
        "[scenario]",
        f"lead_time = {config.tau}",
        f"periods = {config.periods}",
        f"policy = {config.policy}",
        f"seed = {config.seed}",
        f"burn_in = {config.burn_in}",
        f"closed_weekdays = {' '.join(map(str, config.closed_weekdays))}",
        "",
        "[costs]",
        f"lost_sales = {_fmt(config.costs.b)}",
        f"inventory = {_fmt(config.costs.v)}",
        f"spoilage = {_fmt(config.costs.h)}",
        "",
        "[demand]",
        f"kind = {d.kind}",
    ]
    if d.kind == "negbinom_nonstationary":
        lines += [f"lambda_mu = {_fmt(d.lambda_mu)}", f"lambda_kappa = {_fmt(d.lambda_kappa)}"]
    else:
        lines += [f"mu = {_fmt(d.mu)}"]
        if d.kind == "negbinom_fixed":
            lines += [f"k = {'inf' if math.isinf(d.k) else _fmt(d.k)}"]
    lines += ["", "[supply]"]
    lines += [f"row{i + 1} = {' '.join(_fmt(x) for x in row)}" for i, row in enumerate(config.supply.tpm)]
    lines += [
        f"beta_alpha = {_fmt(config.supply.alpha)}",
        f"beta_beta = {_fmt(config.supply.beta)}",
        "",
        "[shelf_life]",
        f"pmf = {' '.join(_fmt(x) for x in config.shelf_life.pmf)}",
        "",
        "[lookahead]",
        f"paths = {config.lookahead.N}",
        f"horizon_extension = {config.lookahead.nu}",
        f"discount = {_fmt(config.lookahead.rho)}",
        f"info_scenario = {config.lookahead.info.number}",
        f"nm_fatol = {_fmt(config.lookahead.nm_fatol)}",
        f"nm_xatol = {_fmt(config.lookahead.nm_xatol)}",
        f"nm_max_evals_per_dim = {config.lookahead.nm_max_evals_per_dim}",
        "",
        "[retailer]",
        f"safety_pct = {_fmt(config.retailer.safety_pct)}",
        f"sales_periods = {config.retailer.sales_periods}",
        f"yield_rate = {_fmt(config.retailer.yield_rate)}",
    ]
    if config.initial_inventory is not None or config.initial_pipeline is not None:
        lines += ["", "[initial]"]
        if config.initial_inventory is not None:
            lines.append(f"inventory = {' '.join(map(str, config.initial_inventory))}")
        if config.initial_pipeline is not None:
            lines.append(f"pipeline = {' '.join(map(str, config.initial_pipeline))}")
    return "\n".join(lines) + "\n"
