"""Compiled inner loops for the Monte Carlo lookahead.

These mirror :mod:`sdli.dynamics` on flat arrays; the pure-Python versions
there serve as the reference the tests compare against.
"""
import math

import numpy as np
from numba import njit


@njit(cache=True)
def binom_ppf(u, n, p):
    """Smallest k with Binomial(n, p).cdf(k) >= u, by exact pmf summation."""
    if n <= 0 or p <= 0.0 or u <= 0.0:
        return 0
    if p >= 1.0 or u >= 1.0:
        return n
    return _binom_ppf(u, n, p, math.log1p(-p), p / (1.0 - p))


@njit(cache=True)
def _binom_ppf(u, n, p, lq, ratio):
    # lq = log(1 - p) and ratio = p / (1 - p), hoisted out of hot loops
    mode = int((n + 1) * p)
    if mode > n:
        mode = n
    if n * lq > -700.0:
        pmf = math.exp(n * lq)
        cdf = pmf
        k = 0
        while cdf < u and k < n:
            pmf *= (n - k) / (k + 1.0) * ratio
            k += 1
            cdf += pmf
            if pmf == 0.0 and k > mode:
                break
        return k
    # (1-p)^n underflows: start from the mode and sum outwards
    pm = math.exp(
        math.lgamma(n + 1.0)
        - math.lgamma(mode + 1.0)
        - math.lgamma(n - mode + 1.0)
        + mode * math.log(p)
        + (n - mode) * lq
    )
    if u < 1e-12:
        # deep lower tail: find where the terms vanish, then sum upwards
        term = pm
        k = mode
        while k > 0 and term > 1e-300:
            term *= k / ((n - k + 1.0) * ratio)
            k -= 1
        cdf = term
        while cdf < u and k < n:
            term *= (n - k) / (k + 1.0) * ratio
            k += 1
            cdf += term
        return k
    cdf = pm
    term = pm
    k = mode
    while k > 0:
        term *= k / ((n - k + 1.0) * ratio)
        k -= 1
        cdf += term
        if term < 1e-18 * cdf:
            break
    k = mode
    term = pm
    if cdf >= u:
        while k > 0 and cdf - term >= u:
            cdf -= term
            term *= k / ((n - k + 1.0) * ratio)
            k -= 1
        return k
    while cdf < u and k < n:
        term *= (n - k) / (k + 1.0) * ratio
        k += 1
        cdf += term
        if term == 0.0:
            break
    return k


@njit(cache=True)
def binom_ppf_array(u, n, p):
    out = np.empty(len(n), dtype=np.int64)
    for i in range(len(n)):
        out[i] = binom_ppf(u[i], n[i], p[i])
    return out


@njit(cache=True)
def _period(inv, q, d, u_row, hazards, lq, ratio, expected):
    """Advance ``inv`` in place through one period; returns (lost, spoiled, ending)."""
    J = inv.shape[0]
    inv[0] += q
    rem = d
    for a in range(J - 1, -1, -1):
        if rem <= 0.0:
            break
        take = inv[a] if inv[a] < rem else rem
        inv[a] -= take
        rem -= take
    z = 0.0
    ending = 0.0
    for a in range(J):
        n = inv[a]
        if n > 0.0:
            p = hazards[a]
            if expected:
                s = n * p
            elif p >= 1.0 or u_row[a] >= 1.0:
                s = n
            elif p <= 0.0 or u_row[a] <= 0.0:
                s = 0.0
            else:
                s = float(_binom_ppf(u_row[a], int(n + 0.5), p, lq[a], ratio[a]))
            inv[a] = n - s
            z += s
        ending += inv[a]
    for a in range(J - 1, 0, -1):
        inv[a] = inv[a - 1]
    inv[0] = 0.0
    return rem, z, ending


@njit(cache=True)
def _hazard_terms(hazards):
    J = hazards.shape[0]
    lq = np.zeros(J)
    ratio = np.zeros(J)
    for a in range(J):
        p = hazards[a]
        if 0.0 < p < 1.0:
            lq[a] = math.log1p(-p)
            ratio[a] = p / (1.0 - p)
    return lq, ratio


@njit(cache=True)
def lead_time_states(inv0, pending, demand, frac, spoil_u, hazards, expected):
    """Per-path inventory at the start of the first period the decision affects."""
    N = demand.shape[0]
    J = inv0.shape[0]
    out = np.empty((N, J))
    inv = np.empty(J)
    lq, ratio = _hazard_terms(hazards)
    for n in range(N):
        for a in range(J):
            inv[a] = inv0[a]
        for s in range(pending.shape[0]):
            q = math.floor(frac[n, s] * pending[s] + 0.5)
            _period(inv, q, demand[n, s], spoil_u[n, s], hazards, lq, ratio, expected)
        for a in range(J):
            out[n, a] = inv[a]
    return out


@njit(cache=True)
def lookahead_cost(r, inv_tau, demand, frac, spoil_u, hazards, expected, tau, weights, b, v, h):
    """Sample-average weighted cost of the order vector ``r`` over frozen paths."""
    N, J = inv_tau.shape
    inv = np.empty(J)
    lq, ratio = _hazard_terms(hazards)
    total = 0.0
    for n in range(N):
        for a in range(J):
            inv[a] = inv_tau[n, a]
        for j in range(r.shape[0]):
            s = tau + j
            q = math.floor(frac[n, s] * r[j] + 0.5)
            lost, z, ending = _period(inv, q, demand[n, s], spoil_u[n, s], hazards, lq, ratio, expected)
            total += weights[j] * (v * ending + b * lost + h * z)
    return total / N
