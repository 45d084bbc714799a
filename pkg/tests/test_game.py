import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sparsecommit import (BiasedMpParams, Game, MixedStrategy, best_response, expected_utility,
                          gen_biased_matching_pennies, nash_zero_sum, sse_unconstrained)
from sparsecommit.game import pure_maximin

payoffs = arrays(float, st.tuples(st.integers(1, 6), st.integers(1, 6)),
                 elements=st.integers(-20, 20).map(float))


def test_game_rejects_bad_shapes():
    with pytest.raises(ValueError):
        Game(np.zeros((2, 2)), np.zeros((2, 3)))
    with pytest.raises(ValueError):
        Game(np.zeros((0, 2)), np.zeros((0, 2)))
    with pytest.raises(ValueError):
        Game(np.ones((1, 1)), np.ones((1, 1)), zero_sum=True)
    with pytest.raises(ValueError):
        Game([[np.nan]], [[0.0]])


def test_mixed_strategy_validation():
    with pytest.raises(ValueError):
        MixedStrategy([0.5, 0.6])
    with pytest.raises(ValueError):
        MixedStrategy([1.5, -0.5])
    assert MixedStrategy.from_weights([2.0, 1e-12, 2.0]).support == (0, 2)
    assert MixedStrategy.uniform(4, over=[1, 3]).probs.tolist() == [0, 0.5, 0, 0.5]


def test_json_round_trip(tmp_path):
    g = Game([[1.0, 2.0], [3.0, 4.5]], [[0.0, -1.0], [2.0, 7.0]])
    g.save(tmp_path / "g.json")
    back = Game.load(tmp_path / "g.json")
    assert np.array_equal(back.a, g.a) and np.array_equal(back.b, g.b)
    z = Game.from_zero_sum([[1.0, -1.0]])
    assert "B" not in z.to_dict()
    assert Game.from_dict(json.loads(json.dumps(z.to_dict()))).zero_sum
    with pytest.raises(ValueError):
        Game.from_dict({"n": 3, "m": 1, "A": [[1.0]], "zero_sum": True})


def test_best_response_uses_own_payoff_and_lowest_tie():
    g = Game([[5.0, 0.0]], [[1.0, 1.0]])
    assert best_response(g, 2, [1.0]) == (0, 1.0)
    g = Game([[0.0, 9.0]], [[0.0, 2.0]])
    assert best_response(g, 2, [1.0])[0] == 1
    with pytest.raises(ValueError):
        best_response(g, 3, [1.0])


@pytest.mark.parametrize("a", [0.25, 0.5, 1.0, 2.0])
def test_biased_pennies_closed_form(a):
    p = BiasedMpParams(a)
    ne = nash_zero_sum(gen_biased_matching_pennies(p))
    assert ne.x.probs[0] == pytest.approx(2 / (a + 3), abs=1e-9)
    assert ne.y.probs[0] == pytest.approx((a + 1) / (a + 3), abs=1e-9)
    assert ne.value1 == pytest.approx((1 - a) / (a * (a + 3)), abs=1e-9)


def test_sse_of_small_game():
    # follower prefers column 1 unless row 0 is played with weight >= 2/3
    g = Game([[2.0, 0.0], [4.0, 1.0]], [[1.0, 0.0], [0.0, 2.0]])
    res = sse_unconstrained(g)
    assert res.follower_action == 0
    assert res.strategy.probs[0] == pytest.approx(2 / 3, abs=1e-9)
    assert res.value == pytest.approx(8 / 3, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(payoffs)
def test_saddle_point_properties(a):
    g = Game.from_zero_sum(a)
    ne = nash_zero_sum(g)
    v = ne.value1
    # x guarantees v, y holds Player 1 to v
    assert (ne.x.probs @ g.a).min() >= v - 1e-7
    assert (g.a @ ne.y.probs).max() <= v + 1e-7
    assert expected_utility(g, ne.x, ne.y)[0] == pytest.approx(v, abs=1e-7)
    assert pure_maximin(g.a)[1] <= v + 1e-9


@settings(max_examples=40, deadline=None)
@given(payoffs, st.floats(0.1, 10.0), st.floats(-50.0, 50.0))
def test_value_affine_invariance(a, scale, shift):
    v = nash_zero_sum(Game.from_zero_sum(a)).value1
    w = nash_zero_sum(Game.from_zero_sum(scale * a + shift)).value1
    assert w == pytest.approx(scale * v + shift, abs=1e-6 * (1 + abs(w)))


@settings(max_examples=40, deadline=None)
@given(payoffs, st.data())
def test_best_response_is_maximal(a, data):
    g = Game(a, -a.T[::-1].T)
    y = np.array(data.draw(st.lists(st.floats(0.01, 1.0), min_size=g.m, max_size=g.m)))
    y /= y.sum()
    i, val = best_response(g, 1, y)
    assert np.all(g.a @ y <= val + 1e-12)
    assert i == int(np.flatnonzero(g.a @ y == val)[0])


@settings(max_examples=30, deadline=None)
@given(arrays(float, (3, 3), elements=st.integers(-9, 9).map(float)),
       arrays(float, (3, 3), elements=st.integers(-9, 9).map(float)))
def test_sse_beats_every_pure_commitment(a, b):
    g = Game(a, b)
    res = sse_unconstrained(g)
    # follower's action must be a best response to the commitment
    u2 = res.strategy.probs @ g.b
    assert u2[res.follower_action] >= u2.max() - 1e-7
    for i in range(3):
        br = np.flatnonzero(g.b[i] == g.b[i].max())
        assert res.value >= g.a[i, br].max() - 1e-7
