import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsecommit.lp import LpModel
from sparsecommit.mip import BINARY, CONTINUOUS, INTEGER, MilpModel, MipConfig, MipStatus, ModelBuilder, mip_solve


def knapsack(values, weights, cap):
    mb = ModelBuilder()
    x = mb.add_vars(len(values), 0, 1, values, BINARY)
    mb.add_row(x, weights, "<=", cap)
    return mb.build()


def enumerate_knapsack(values, weights, cap):
    best = 0.0
    for bits in itertools.product((0, 1), repeat=len(values)):
        if np.dot(bits, weights) <= cap:
            best = max(best, float(np.dot(bits, values)))
    return best


def test_small_knapsack(backend):
    out = mip_solve(knapsack([10, 13, 7, 8], [3, 4, 2, 3], 7), backend=backend)
    assert out.status is MipStatus.OPTIMAL
    assert out.objective_value == pytest.approx(23.0)
    assert out.best_bound == pytest.approx(23.0)
    assert np.allclose(out.incumbent, np.round(out.incumbent))


def test_general_integer_variable():
    # max x + y, 2x + 2y <= 7, x integer in [0, 10], y continuous <= 0.25
    mb = ModelBuilder()
    x = mb.add_var(0, 10, 1.0, INTEGER)
    y = mb.add_var(0, 0.25, 1.0, CONTINUOUS)
    mb.add_row([x, y], [2, 2], "<=", 7)
    out = mip_solve(mb.build())
    assert out.incumbent[x] == pytest.approx(3.0)
    assert out.objective_value == pytest.approx(3.25)


def test_integer_infeasible():
    mb = ModelBuilder()
    x = mb.add_var(0, 5, 1.0, INTEGER)
    mb.add_row([x], [2.0], "==", 3.0)
    out = mip_solve(mb.build())
    assert out.status is MipStatus.INFEASIBLE
    assert not out.has_solution


def test_unbounded_relaxation():
    mb = ModelBuilder()
    x = mb.add_var(0, np.inf, 1.0, INTEGER)
    mb.add_row([x], [1.0], ">=", 1.0)
    assert mip_solve(mb.build()).status is MipStatus.UNBOUNDED


def test_node_limit_reports_incumbent_and_bound():
    rng = np.random.default_rng(3)
    vals = rng.integers(10, 60, 22).astype(float)
    wts = rng.integers(10, 60, 22).astype(float)
    out = mip_solve(knapsack(vals, wts, wts.sum() / 2), MipConfig(node_limit=3))
    assert out.status is MipStatus.NODE_LIMIT
    assert out.nodes_explored <= 3
    if out.has_solution:
        assert out.objective_value <= out.best_bound + 1e-9


def test_binary_bounds_checked():
    lp = LpModel([1.0], [[1.0]], ("<=",), [1.0], [0.0], [2.0])
    with pytest.raises(ValueError):
        MilpModel(lp, [BINARY])
    with pytest.raises(ValueError):
        MilpModel(lp, [BINARY, BINARY])


def test_bound_history_monotone():
    rng = np.random.default_rng(8)
    vals, wts = rng.integers(5, 40, 14), rng.integers(5, 40, 14)
    out = mip_solve(knapsack(vals, wts, int(wts.sum() * 0.4)))
    hist = np.array(out.bound_history)
    assert np.all(np.diff(hist) <= 1e-9)
    assert out.lp_solves >= out.nodes_explored


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 30), st.integers(1, 30)), min_size=1, max_size=9), st.floats(0.1, 0.9))
def test_knapsack_matches_enumeration(items, frac):
    values, weights = zip(*items)
    cap = int(sum(weights) * frac)
    out = mip_solve(knapsack(values, weights, cap))
    assert out.objective_value == pytest.approx(enumerate_knapsack(values, weights, cap), abs=1e-7)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31))
def test_backends_agree_on_random_ilps(seed):
    from sparsecommit import _backend
    rng = np.random.default_rng(seed)
    n, m = 6, 4
    mb = ModelBuilder()
    x = mb.add_vars(n, 0, 3, rng.integers(-5, 10, n), INTEGER)
    for _ in range(m):
        mb.add_row(x, rng.integers(0, 6, n), "<=", float(rng.integers(5, 15)))
    model = mb.build()
    want = max(float(model.base.objective @ v) for v in itertools.product(range(4), repeat=n)
               if np.all(model.base.A @ v <= model.base.rhs))
    for name in _backend.AVAILABLE:
        assert mip_solve(model, backend=name).objective_value == pytest.approx(want, abs=1e-7)
