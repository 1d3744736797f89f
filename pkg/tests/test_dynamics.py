import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sdli import _kernels
from sdli.domain import (
    CostParams,
    DemandPath,
    InventoryVector,
    Models,
    PipelineState,
    SimulationState,
)
from sdli.dynamics import (
    DynamicsError,
    advance_period,
    deterministic_rollforward,
    fulfill_fifo,
    period_cost,
)
from sdli.stochastic import binomial_inverse_cdf

COSTS = CostParams()
MODELS = Models(DemandPath(np.array([100.0]), np.inf))


def _state(inv, pending=(60,), t=0):
    return SimulationState(t, InventoryVector(inv), 0, PipelineState(tuple(pending)), MODELS)


def test_worked_transition_example():
    # 10 units two periods old, 40 one period old, 60 due with 20% shortage
    state = _state([0, 40, 10, 0, 0, 0], pending=(60,))
    nxt, out = advance_period(state, 0, 0.8, 46, np.array([12, 2, 0, 0, 0, 0]), COSTS)
    assert out.delivered == 48
    assert out.sold == 46 and out.lost == 0
    assert out.spoiled == 14
    assert out.ending == 38
    assert nxt.inventory == InventoryVector([0, 36, 2, 0, 0, 0])
    assert out.cost == pytest.approx(0.1 * 38 + 1.0 * 14)


def test_fifo_sells_oldest_first():
    inv, sold, lost = fulfill_fifo(np.array([48, 40, 10, 0, 0, 0]), 46)
    assert inv.tolist() == [48, 4, 0, 0, 0, 0]
    assert (sold, lost) == (46, 0)
    inv, sold, lost = fulfill_fifo(np.array([5, 0, 3]), 10)
    assert inv.tolist() == [0, 0, 0] and (sold, lost) == (8, 2)


def _fifo_by_units(counts, demand):
    # unit-level oracle: line units up oldest first and remove the first `demand`
    units = [age for age in range(len(counts) - 1, -1, -1) for _ in range(counts[age])]
    sold = units[:demand]
    out = np.array(counts)
    for age in sold:
        out[age] -= 1
    return out, len(sold), demand - len(sold)


@given(st.lists(st.integers(0, 8), min_size=1, max_size=6), st.integers(0, 40))
def test_fifo_matches_unit_level_oracle(counts, demand):
    got = fulfill_fifo(np.array(counts), demand)
    ref = _fifo_by_units(counts, demand)
    assert got[0].tolist() == ref[0].tolist() and got[1:] == ref[1:]


def test_fifo_leaves_the_youngest_stock_of_any_sale_order():
    counts = [3, 2, 2]
    best = None
    for perm in itertools.permutations(range(3)):
        inv = list(counts)
        rem = 4
        for age in perm:
            take = min(inv[age], rem)
            inv[age] -= take
            rem -= take
        key = tuple(inv[::-1])  # compare oldest bucket first
        best = key if best is None or key < best else best
    fifo, _, _ = fulfill_fifo(np.array(counts), 4)
    assert tuple(fifo.tolist()[::-1]) == best


def test_exhaustive_small_transitions_conserve_units():
    for inv0 in itertools.product(range(3), repeat=3):
        for due, frac, demand in itertools.product(range(3), (0.0, 0.5, 1.0), range(4)):
            state = SimulationState(0, InventoryVector(inv0), 0, PipelineState((due,)), MODELS)
            u = np.array([0.3, 0.6, 0.9])
            nxt, out = advance_period(
                state, 1, frac, demand, lambda c: binomial_inverse_cdf(u, c, [0.5, 0.5, 1.0]), COSTS
            )
            i_t = sum(inv0)
            assert i_t + out.delivered == out.sold + out.spoiled + out.ending
            assert out.sold + out.lost == demand
            # ageing only ever drops the oldest bucket
            assert nxt.inventory.total() <= out.ending
            assert out.cost == pytest.approx(period_cost(COSTS, out.ending, out.lost, out.spoiled))


def test_zero_lead_time_delivers_same_period():
    state = SimulationState(0, InventoryVector.empty(3), 0, PipelineState(()), MODELS)
    nxt, out = advance_period(state, 10, 1.0, 4, np.zeros(3, dtype=int), COSTS)
    assert out.delivered == 10 and out.sold == 4 and out.ending == 6
    assert nxt.inventory == InventoryVector([0, 6, 0])


def test_invalid_inputs_raise():
    state = _state([0, 5, 0, 0, 0, 0])
    with pytest.raises(DynamicsError):
        advance_period(state, -1, 1.0, 0, np.zeros(6), COSTS)
    with pytest.raises(DynamicsError):
        advance_period(state, 0, 1.0, 0, np.array([0, 6, 0, 0, 0, 0]), COSTS)
    with pytest.raises(DynamicsError):
        advance_period(state, 0, 1.5, 0, np.zeros(6), COSTS)


def test_deterministic_rollforward_by_hand():
    # one period: deliver 0.5 * 10, sell 3 from the 4 old units, spoil by hazards
    inv = deterministic_rollforward([0, 4, 0], [10], [3.0], [0.1, 0.5, 1.0], 0.5)
    # after sales (5, 1, 0) -> after spoilage (4.5, 0.5, 0) -> aged (0, 4.5, 0.5)
    assert np.allclose(inv, [0, 4.5, 0.5])


@given(
    st.lists(st.integers(0, 60), min_size=6, max_size=6),
    st.lists(st.integers(0, 150), min_size=3, max_size=3),
    st.lists(st.integers(0, 150), min_size=7, max_size=7),
    st.lists(st.floats(0, 1), min_size=7, max_size=7),
    st.lists(st.integers(0, 200), min_size=4, max_size=4),
    st.integers(0, 2**31),
)
def test_compiled_kernels_match_reference_dynamics(inv0, pending, demand, frac, r, seed):
    """The lookahead kernels and the reference transition agree path by path."""
    hazards = np.array([0.05, 0.105, 0.176, 0.5, 0.571, 1.0])
    u = np.random.default_rng(seed).uniform(size=(1, 7, 6))
    demand_a = np.array([demand], dtype=float)
    frac_a = np.array([frac])
    inv_tau = _kernels.lead_time_states(
        np.array(inv0, dtype=float), np.array(pending, dtype=float), demand_a, frac_a, u, hazards, False
    )
    weights = 0.9 ** np.arange(4)
    got = _kernels.lookahead_cost(
        np.array(r, dtype=float), inv_tau, demand_a, frac_a, u, hazards, False, 3, weights, 5.0, 0.1, 1.0
    )

    # reference: the pending orders arrive first, then r_0..r_3 one per period
    state = SimulationState(0, InventoryVector(inv0), 0, PipelineState(tuple(pending) + tuple(r)), MODELS)
    expected = 0.0
    for s in range(7):
        state, out = advance_period(
            state, 0, frac[s], demand[s], lambda c, s=s: binomial_inverse_cdf(u[0, s], c, hazards), COSTS
        )
        if s == 2:
            assert np.allclose(state.inventory.counts, inv_tau[0])
        if s >= 3:
            expected += weights[s - 3] * out.cost
    assert got == pytest.approx(expected, rel=1e-12, abs=1e-9)
