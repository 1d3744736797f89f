"""Three ordering rules on one perishable SKU.

Every policy faces the same simulated demand, supply and spoilage draws, so
cost differences come from the decisions alone. The newsvendor orders the
critical-ratio quantile of one day's demand and ignores stock on hand. The
deterministic policy rolls expected stock forward over the lead time and
tops it up to mean demand. The lookahead policy optimises orders against
1000 sampled futures.

    python demos/01_benchmark_policies.py --T 500
"""
import argparse
import time
from dataclasses import replace

from sdli import InfoScenario, ScenarioConfig, build_policy, generate_environment, run_simulation
from sdli.simulator import scenario_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--T", type=int, default=500, help="periods to simulate")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--paths", type=int, default=1000, help="lookahead sample paths")
    args = ap.parse_args()

    base = ScenarioConfig()
    base = replace(base, lookahead=replace(base.lookahead, N=args.paths))
    env = generate_environment(base, args.T, args.seed)
    print(f"{args.T} periods, mean demand {env.demand.mean():.1f}, "
          f"{(env.supply_state != 1).mean():.1%} of days with a supply problem\n")

    print(f"{'policy':<14}{'cost':>8}{'fill':>9}{'stock':>8}{'spoiled':>9}{'secs':>7}")
    for name in ("newsvendor", "deterministic", "lookahead"):
        config = scenario_config(base, InfoScenario.from_number(8)) if name == "lookahead" else base
        t0 = time.time()
        m = run_simulation(config, build_policy(config, name, seed=args.seed), args.T, args.seed, environment=env)
        print(f"{name:<14}{m.avg_cost:8.2f}{m.fill_rate:9.2%}{m.avg_inventory:8.1f}{m.avg_spoilage:9.2f}{time.time() - t0:7.1f}")

    print("\nCompare the stock and spoilage columns: the newsvendor never looks at what")
    print("is already on the shelf, while the deterministic policy has no safety margin.")


if __name__ == "__main__":
    main()
