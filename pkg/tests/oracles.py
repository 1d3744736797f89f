"""Independent reference implementations used by the unit and acceptance tests.

None of these call into the package's compiled kernels or optimizer.
"""
import math

import numpy as np
from scipy import stats


def negbinom_quantile_by_summation(mu, k, p):
    """Smallest x with CDF(x) >= p, summing scipy's pmf term by term."""
    dist = stats.poisson(mu) if math.isinf(k) else stats.nbinom(mu * k, k / (1.0 + k))
    x, cdf = 0, 0.0
    while True:
        cdf += float(dist.pmf(x))
        if cdf >= p:
            return x
        x += 1


def binom_ppf_by_summation(u, n, p):
    cdf = 0.0
    for k in range(n + 1):
        cdf += stats.binom.pmf(k, n, p)
        if cdf >= u - 1e-15:
            return k
    return n


def _fifo(inv, demand):
    inv = inv.copy()
    rem = demand
    for age in range(len(inv) - 1, -1, -1):
        take = min(inv[age], rem)
        inv[age] -= take
        rem -= take
    return inv, rem


def point_forecast_cost(state, r, rho, costs):
    """Weighted cost of order vector ``r`` with every source at its mean."""
    frac = 1.0 - state.models.supply.mean_shortage()
    hazards = state.models.shelf_life.hazards
    tau = state.pipeline.tau
    mu, _ = state.models.demand.window(state.t, tau + len(r))
    inv = state.inventory.counts.astype(float)
    total = 0.0
    for s, (due, d) in enumerate(zip(list(state.pipeline.pending) + list(r), mu)):
        inv[0] += math.floor(frac * due + 0.5)
        inv, lost = _fifo(inv, math.floor(d + 0.5))
        z = inv * hazards
        inv = inv - z
        if s >= tau:
            total += rho ** (s - tau) * (costs.v * inv.sum() + costs.b * lost + costs.h * z.sum())
        inv = np.concatenate(([0.0], inv[:-1]))
    return total


def grid_search_first_order(state, rho, costs, upper=300, second_step=3):
    """Brute-force minimiser over (r0, r1); returns r0."""
    grid0 = np.arange(0, upper + 1)
    grid1 = np.arange(0, upper + 1, second_step)
    values = np.array([[point_forecast_cost(state, (a, b), rho, costs) for b in grid1] for a in grid0])
    return int(grid0[np.unravel_index(np.argmin(values), values.shape)[0]])
