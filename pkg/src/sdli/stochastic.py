"""Distributions for demand, supply and spoilage.

Demand is negative binomial with mean ``mu`` and ``k = mu / (var - mu)``,
i.e. ``var = mu + mu / k``. In scipy terms that is ``nbinom(n=mu * k,
p=k / (1 + k))``; ``k = inf`` is the Poisson limit.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import stats

from . import _kernels
from .domain import FULL, NO_DELIVERY, PARTIAL, UNKNOWN_SUPPLY_STATE, DemandModel, SupplyModel
from .rng import RngStream, Tag


class OverdispersionError(ValueError):
    pass


class QuantileError(ValueError):
    pass


class StationaryDistributionError(ValueError):
    pass


def negbinom_from_mean_var(mu: float, var: float):
    """Return ``(mu, k)`` for a negative binomial with the given moments."""
    if not mu > 0:
        raise OverdispersionError(f"mean must be positive, got {mu}")
    if not var > mu:
        raise OverdispersionError(
            f"negative binomial needs var > mean (got mean {mu}, var {var})"
        )
    return mu, mu / (var - mu)


def _scipy_dist(mu, k):
    if mu <= 0:
        return None
    if not np.isfinite(k):
        return stats.poisson(mu)
    return stats.nbinom(mu * k, k / (1.0 + k))


def negbinom_pmf_cdf(mu: float, k: float, x: int):
    if x < 0:
        return 0.0, 0.0
    dist = _scipy_dist(mu, k)
    if dist is None:
        return 1.0 if x == 0 else 0.0, 1.0
    return float(dist.pmf(x)), float(dist.cdf(x))


def negbinom_quantile(mu: float, k: float, p: float) -> int:
    """Smallest integer q with CDF(q) >= p, found by summing the pmf.

    The search is capped at ``mu + 50 sd``; reaching the cap raises.
    """
    if not 0 <= p < 1:
        raise QuantileError(f"quantile level must be in [0, 1), got {p}")
    if mu <= 0 or p == 0:
        return 0
    sd = math.sqrt(mu + (mu / k if np.isfinite(k) else 0.0))
    cap = int(math.ceil(mu + 50 * sd))
    if np.isfinite(k):
        size = mu * k
        log_ratio = math.log(mu / (mu + size))  # log(1 - success prob)
        log_pmf = size * math.log(size / (mu + size))
        step = lambda x: math.log((size + x) / (x + 1.0)) + log_ratio
    else:
        log_pmf = -mu
        log_mu = math.log(mu)
        step = lambda x: log_mu - math.log(x + 1.0)
    cdf = math.exp(log_pmf)
    x = 0
    while cdf < p:
        log_pmf += step(x)
        x += 1
        cdf += math.exp(log_pmf)
        if x > cap:
            raise QuantileError(f"quantile {p} beyond mu + 50 sd ({cap})")
    return x


def sample_negbinom(rng: np.random.Generator, mu, k, size=None):
    """Gamma-Poisson draws; ``k = inf`` gives Poisson, ``mu = 0`` gives 0."""
    mu, k = np.broadcast_arrays(np.asarray(mu, dtype=float), np.asarray(k, dtype=float))
    if size is None:
        size = mu.shape
    mu = np.broadcast_to(mu, size)
    k = np.broadcast_to(k, size)
    lam = np.array(np.maximum(mu, 0.0), ndmin=1)
    k = np.array(k, ndmin=1)
    mu = lam.copy()
    mixed = np.isfinite(k) & (mu > 0)
    if mixed.any():
        lam[mixed] = rng.standard_gamma(mu[mixed] * k[mixed]) / k[mixed]
    out = rng.poisson(lam)
    return out.reshape(size) if size != () else out[0]


def draw_demand_parameters(model: DemandModel, stream: RngStream):
    """Per-period ``(mu_t, k_t)`` for a non-stationary model.

    ``kappa_t = 0`` falls back to Poisson (k = inf).
    """
    g = stream.at(tag=Tag.PARAM_DRAW).generator()
    mu = float(g.poisson(model.lambda_mu))
    kappa = float(g.poisson(model.lambda_kappa))
    k = mu / kappa if kappa > 0 else np.inf
    return mu, k


def sample_nonstationary_demand(model: DemandModel, stream: RngStream) -> int:
    if model.kind != "negbinom_nonstationary":
        raise ValueError("expected a non-stationary demand model")
    mu, k = draw_demand_parameters(model, stream)
    if mu <= 0:
        return 0
    g = stream.at(tag=Tag.DEMAND).generator()
    return int(sample_negbinom(g, mu, k))


def conditional_spoilage_probs(pmf) -> np.ndarray:
    """Probability of spoiling after period j given survival up to it.

    Entries past the last shelf life with positive mass are NaN (unused).
    """
    f = np.asarray(pmf, dtype=float)
    survival = 1.0 - np.concatenate(([0.0], np.cumsum(f)[:-1]))
    p = np.full(len(f), np.nan)
    live = survival > 1e-12
    p[live] = np.clip(f[live] / survival[live], 0.0, 1.0)
    last = np.flatnonzero(f > 0)
    if last.size:
        p[last[-1]] = 1.0
        p[last[-1] + 1 :] = np.nan
    return p


def pmf_from_conditional(p) -> np.ndarray:
    p = np.where(np.isnan(p), 1.0, np.asarray(p, dtype=float))
    survive = np.concatenate(([1.0], np.cumprod(1.0 - p)[:-1]))
    return p * survive


def binomial_inverse_cdf(u, n, p) -> np.ndarray:
    """Comonotone binomial draws: the same ``u`` never gives fewer for larger ``n``."""
    u, n, p = np.broadcast_arrays(
        np.asarray(u, dtype=float), np.asarray(n, dtype=np.int64), np.asarray(p, dtype=float)
    )
    shape = u.shape
    out = _kernels.binom_ppf_array(u.ravel().copy(), n.ravel().copy(), p.ravel().copy())
    return out.reshape(shape)


def sample_spoilage(counts, hazards, stream: RngStream) -> np.ndarray:
    """Spoiled units per age bucket; one uniform per bucket."""
    counts = np.asarray(counts, dtype=np.int64)
    u = stream.at(tag=Tag.SPOILAGE).uniform(len(counts))
    return binomial_inverse_cdf(u, counts, hazards)


def stationary_distribution(tpm) -> np.ndarray:
    """Solve ``pi P = pi`` with ``sum(pi) = 1``; power iteration as fallback."""
    P = np.asarray(tpm, dtype=float)
    n = P.shape[0]
    A = np.eye(n) - P.T
    if np.linalg.matrix_rank(A, tol=1e-10) < n - 1:
        raise StationaryDistributionError(
            "stationary distribution is not unique (reducible chain)"
        )
    M = np.vstack([A[:-1], np.ones(n)])
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    try:
        pi = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError:
        pi = np.full(n, 1.0 / n)
        for _ in range(100000):
            nxt = pi @ P
            if np.max(np.abs(nxt - pi)) < 1e-15:
                break
            pi = nxt
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def mean_shortage_fraction(supply: SupplyModel) -> float:
    pi = stationary_distribution(supply.tpm)
    supplied = pi[0] + pi[2] * supply.alpha / (supply.alpha + supply.beta)
    return float(1.0 - supplied)


def next_supply_state(prev: int, tpm, stream: RngStream) -> int:
    """Next delivery state; an unknown previous state draws from the stationary law."""
    P = np.asarray(tpm, dtype=float)
    if prev == UNKNOWN_SUPPLY_STATE:
        row = stationary_distribution(P)
    else:
        row = P[prev - 1]
    u = stream.at(tag=Tag.SUPPLY_STATE).uniform()
    return int(np.searchsorted(np.cumsum(row)[:-1], u, side="right")) + 1


def sample_delivery_fraction(state: int, alpha: float, beta: float, stream: RngStream) -> float:
    if state == FULL:
        return 1.0
    if state == NO_DELIVERY:
        return 0.0
    if state != PARTIAL:
        raise ValueError(f"unknown supply state {state}")
    g = stream.at(tag=Tag.SUPPLY_FRACTION).generator()
    x = g.standard_gamma(alpha)
    y = g.standard_gamma(beta)
    return float(x / (x + y))


def sample_supply_paths(supply: SupplyModel, prev: int, n_paths: int, n_periods: int, stream: RngStream):
    """Delivered fractions for a block of sample paths, shape (paths, periods)."""
    P = np.asarray(supply.tpm, dtype=float)
    cum = np.cumsum(P, axis=1)[:, :-1]
    u = stream.at(tag=Tag.LOOKAHEAD_SUPPLY_STATE).uniform((n_paths, n_periods))
    g = stream.at(tag=Tag.LOOKAHEAD_SUPPLY_FRACTION).generator()
    x = g.standard_gamma(supply.alpha, (n_paths, n_periods))
    y = g.standard_gamma(supply.beta, (n_paths, n_periods))
    partial = x / (x + y)
    if prev == UNKNOWN_SUPPLY_STATE:
        pi_cum = np.cumsum(stationary_distribution(P))[:-1]
        state = np.searchsorted(pi_cum, u[:, 0], side="right")
        start = 1
    else:
        state = np.full(n_paths, prev - 1)
        start = 0
    frac = np.empty((n_paths, n_periods))
    for s in range(n_periods):
        if s >= start:
            state = (u[:, s, None] >= cum[state]).sum(axis=1)
        frac[:, s] = np.where(state == 0, 1.0, np.where(state == 1, 0.0, partial[:, s]))
    return frac
