"""Command-line entry point: ``sdli <command> ...``.

Exit codes: 0 success, 1 runtime failure, 2 invalid input.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from .casestudy import evaluate_case_study, synthesize_history
from .config import ConfigError, baseline_path, load_config
from .domain import POLICIES, RETAILER_SKUS, ValidationError
from .estimation import (
    EstimationError,
    fit_models,
    read_history_csv,
    records_in,
    rolling_window_plan,
    write_history_csv,
)
from .simulator import METRIC_NAMES, SWEEPS, run_eviu_grid, run_sensitivity, run_simulation

log = logging.getLogger("sdli")

QUICK_T = 500
QUICK_N = 200
TRAJECTORY_COLUMNS = ("t", "order", "delivered", "demand", "sold", "lost", "spoiled", "ending", "cost")


class UsageError(ValueError):
    pass


def _num(x):
    # repr keeps every significant digit of a float
    return repr(float(x)) if isinstance(x, float) else x


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_num(v) for v in row])


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _seed(args, config) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("SDLI_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"SDLI_SEED={env!r} is not an integer") from None
    return config.seed


def _config(args):
    path = getattr(args, "config", None) or baseline_path()
    config = load_config(path)
    if getattr(args, "quick", False):
        config = replace(config, periods=QUICK_T, lookahead=replace(config.lookahead, N=QUICK_N))
    if getattr(args, "paths", None) is not None:
        config = replace(config, lookahead=replace(config.lookahead, N=args.paths))
    T = getattr(args, "T", None)
    if T is not None:
        if T < 1:
            raise UsageError(f"--T must be >= 1, got {T}")
        config = replace(config, periods=T)
    return config


def cmd_simulate(args) -> int:
    if args.policy is not None and args.policy not in POLICIES:
        raise UsageError(f"unknown policy {args.policy!r}; choose from {', '.join(POLICIES)}")
    config = _config(args)
    if args.policy:
        config = replace(config, policy=args.policy)
    seed = _seed(args, config)
    metrics = run_simulation(config, periods=config.periods, seed=seed)
    out = _out_dir(args)
    summary = {"policy": config.policy, "seed": seed, **metrics.summary()}
    _write_json(out / "metrics.json", summary)
    _write_csv(
        out / "trajectory.csv",
        TRAJECTORY_COLUMNS,
        ([getattr(o, c) for c in TRAJECTORY_COLUMNS] for o in metrics.trajectory),
    )
    print(
        f"{config.policy}: T={config.periods} cost={metrics.avg_cost:.4f} "
        f"fill={100 * metrics.fill_rate:.2f}% order={metrics.avg_order:.2f} "
        f"inventory={metrics.avg_inventory:.2f} spoilage={metrics.avg_spoilage:.2f}"
    )
    return 0


def cmd_eviu(args) -> int:
    config = _config(args)
    seed = _seed(args, config)
    rows = run_eviu_grid(config, config.periods, seed, jobs=args.jobs)
    header = ("scenario", "demand", "shelf_life", "supply") + METRIC_NAMES
    out = _out_dir(args)
    _write_csv(out / "eviu.csv", header, ([r[c] if not isinstance(r[c], bool) else int(r[c]) for c in header] for r in rows))
    base = next((r["avg_cost"] for r in rows if r["scenario"] == 1), None)
    for r in rows:
        rel = f" ({100 * (r['avg_cost'] / base - 1):+.1f}%)" if base else ""
        print(f"scenario {r['scenario']}: cost={r['avg_cost']:.4f}{rel} fill={100 * r['fill_rate']:.2f}%")
    return 0


def cmd_sensitivity(args) -> int:
    if args.sweep not in SWEEPS:
        raise UsageError(f"unknown sweep {args.sweep!r}; choose from {', '.join(SWEEPS)}")
    config = _config(args)
    seed = _seed(args, config)
    rows = run_sensitivity(args.sweep, config, config.periods, seed, jobs=args.jobs)
    header = ("sweep_value", "scenario", "metric", "value")
    out = _out_dir(args)
    _write_csv(out / f"sensitivity_{args.sweep}.csv", header, ([r[c] for c in header] for r in rows))
    for r in rows:
        if r["metric"] == "avg_cost":
            print(f"{args.sweep}={r['sweep_value']} scenario {r['scenario']}: cost={r['value']:.4f}")
    return 0


def _read_history(path):
    if not Path(path).is_file():
        raise UsageError(f"history file not found: {path}")
    return read_history_csv(path)


def cmd_case_eval(args) -> int:
    config = _config(args)
    if args.sku:
        config = replace(config, retailer=RETAILER_SKUS[args.sku])
    seed = _seed(args, config)
    records = _read_history(args.history)
    result = evaluate_case_study(records, config, seed=seed)
    out = _out_dir(args)
    summary = result.summary()
    summary["windows"] = [
        {"train": [f"{y}-{m:02d}" for y, m in w.train], "evaluate": [f"{y}-{m:02d}" for y, m in w.evaluate]}
        for w in result.windows
    ]
    _write_json(out / "case_eval.json", summary)
    names = list(result.costs)
    _write_csv(
        out / "case_eval_daily.csv",
        ("date", *[f"cost_{n}" for n in names], "difference"),
        (
            (d.isoformat(), *[float(result.costs[n][i]) for n in names], float(result.differences[i]))
            for i, d in enumerate(result.dates)
        ),
    )
    counts, edges = result.histogram
    _write_csv(
        out / "case_eval_histogram.csv",
        ("bin_left", "bin_right", "count"),
        ((float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(len(counts))),
    )
    print(
        f"{names[0]} vs {names[-1]}: relative cost change {100 * result.relative_change:+.2f}% "
        f"over {len(result.dates)} days"
    )
    return 0


def _parse_window(text: str):
    try:
        train, evaluate = (int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"--window expects TRAIN,EVAL months, got {text!r}") from None
    if train < 1 or evaluate < 1:
        raise UsageError("--window months must be >= 1")
    return train, evaluate


def cmd_estimate(args) -> int:
    train, evaluate = _parse_window(args.window)
    records = _read_history(args.history)
    plan = rolling_window_plan([r.date for r in records], train, evaluate)
    out = _out_dir(args)
    for i, w in enumerate(plan, start=1):
        fit = fit_models(records_in(records, w.train), shelf_life_method=args.shelf_life_method)
        payload = {
            "train": [f"{y}-{m:02d}" for y, m in w.train],
            "evaluate": [f"{y}-{m:02d}" for y, m in w.evaluate],
            "demand": {"mu": fit.demand.mu, "k": None if fit.demand.k == float("inf") else fit.demand.k},
            "supply": {
                "tpm": fit.supply.tpm.tolist(),
                "beta_alpha": fit.supply.alpha,
                "beta_beta": fit.supply.beta,
                "mean_shortage": fit.supply.mean_shortage(),
            },
            "shelf_life": {"pmf": fit.shelf_life.pmf.tolist()},
        }
        _write_json(out / f"window_{i:02d}.json", payload)
        print(
            f"window {i}: eval {payload['evaluate'][0]} mu={fit.demand.mu:.2f} "
            f"theta_bar={100 * payload['supply']['mean_shortage']:.2f}% "
            f"mean shelf life={fit.shelf_life.mean():.2f}"
        )
    return 0


def cmd_synthesize(args) -> int:
    config = _config(args)
    seed = _seed(args, config)
    records = synthesize_history(config, days=args.days, seed=seed, policy=args.policy)
    path = Path(args.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_history_csv(records, path)
    print(f"wrote {len(records)} days to {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sdli", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_positional=True, quick=True):
        if config_positional:
            sp.add_argument("config", help="scenario config file (INI)")
        else:
            sp.add_argument("--config", help="scenario config file (default: bundled baseline)")
        sp.add_argument("--T", type=int, help="number of simulated periods")
        sp.add_argument("--seed", type=int, help="random seed (default: $SDLI_SEED, then the config)")
        sp.add_argument("--paths", type=int, help="lookahead sample paths N")
        if quick:
            sp.add_argument("--quick", action="store_true", help=f"T={QUICK_T}, N={QUICK_N}")

    s = sub.add_parser("simulate", help="run one policy and write metrics.json and trajectory.csv")
    common(s)
    s.add_argument("--policy", help=f"one of {', '.join(POLICIES)} (default: the config)")
    s.add_argument("--out", default="out", help="output directory")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("eviu", help="lookahead under all eight information scenarios")
    common(s)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out", default="out")
    s.set_defaults(func=cmd_eviu)

    s = sub.add_parser("sensitivity", help="parameter sweep, long-format CSV")
    s.add_argument("sweep", help=f"one of {', '.join(SWEEPS)}")
    common(s, config_positional=False)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out", default="out")
    s.set_defaults(func=cmd_sensitivity)

    s = sub.add_parser("case-eval", help="paired rolling-window evaluation on a history CSV")
    s.add_argument("history")
    common(s, config_positional=False)
    s.add_argument("--sku", choices=sorted(RETAILER_SKUS), help="retailer rule preset")
    s.add_argument("--out", default="out")
    s.set_defaults(func=cmd_case_eval)

    s = sub.add_parser("estimate", help="fit models per rolling window")
    s.add_argument("history")
    s.add_argument("--window", default="6,1", help="TRAIN,EVAL months (default 6,1)")
    s.add_argument("--shelf-life-method", choices=("hazard", "frequency"), default="hazard")
    s.add_argument("--out", default="out")
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("synthesize", help="simulate a year of history records")
    common(s, config_positional=False, quick=False)
    s.add_argument("--days", type=int, default=365)
    s.add_argument("--policy", default="retailer", choices=POLICIES)
    s.add_argument("--out", default="history.csv", help="output CSV path")
    s.set_defaults(func=cmd_synthesize)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, ValidationError, EstimationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"runtime failure: {exc}", file=sys.stderr)
        if args.verbose:
            raise
        return 1


if __name__ == "__main__":
    sys.exit(main())
