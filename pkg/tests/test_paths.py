import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsecommit import (OracleConfig, PathGame, PathGameSpec, combined_solve, constraint_sets_from_paths,
                          gen_path_game, path_best_response, single_oracle_solve, solve_k_sparse_brute_force,
                          solve_k_sparse_zero_sum, solve_structured, solve_support_restricted)
from sparsecommit.oracle import solve_large_n
from sparsecommit.paths import (CHECKPOINT_VS_PATHS, PATHS_VS_EDGES, PATHS_VS_EXIT, PATHS_VS_PATHS, SCENARIOS,
                                PathColumnOracle, scenario)

# 3x3 grid, depth 4, one leader start and one evader start: a 48 x 48 game
PVP = PathGameSpec(3, 3, 4, leader_starts=(0,), evader_starts=(8,), desirable_exits=(2, 6), seed=5)
PVP_VALUES = {1: -8.061302, 2: -7.633893}  # frozen from full enumeration + brute force


def brute_force_paths(starts, nbrs, depth):
    out = []
    for s in sorted(starts):
        for steps in itertools.product(*[range(4)] * depth):
            p = [s]
            for i in steps:
                if i >= len(nbrs[p[-1]]):
                    break
                p.append(nbrs[p[-1]][i])
            else:
                out.append(tuple(p))
    return sorted(out)


def test_spec_validation():
    with pytest.raises(ValueError):
        PathGameSpec(0, 3, 2, leader_starts=(0,), evader_starts=(1,))
    with pytest.raises(ValueError):
        PathGameSpec(3, 3, 2, leader_starts=(9,), evader_starts=(1,))
    with pytest.raises(ValueError):
        PathGameSpec(3, 3, 2, evader_starts=(1,))
    with pytest.raises(ValueError):
        PathGameSpec(3, 3, 2, leader_starts=(0,), mode="nope")
    with pytest.raises(ValueError):
        PathGameSpec(3, 3, 2, leader_starts=(0,), evader_starts=(1,), desirable_range=(5, 1))


def test_two_by_two_counts():
    g = PathGame(PathGameSpec(2, 2, 1, leader_starts=(0,), evader_starts=(3,)))
    assert g.leader_actions() == [(0, 1), (0, 2)]
    assert g.evader_actions() == [(3, 1), (3, 2)]
    assert g.count_paths((0, 3)) == 4
    assert len(g.physical_edges) == 4


def test_waiting_adds_self_loops():
    g = PathGame(PathGameSpec(2, 2, 2, leader_starts=(0,), evader_starts=(3,), allow_wait=True))
    assert g.count_paths((0,)) == 9
    assert (0, 0, 0) in g.leader_actions()


@pytest.mark.parametrize("w,h,t", [(3, 3, 3), (4, 2, 4), (2, 3, 5)])
def test_path_enumeration_matches_brute_force(w, h, t):
    g = PathGame(PathGameSpec(w, h, t, leader_starts=(0, w * h - 1), evader_starts=(0,)))
    paths = g.leader_actions()
    assert paths == brute_force_paths((0, w * h - 1), g.nbrs, t)
    assert len(paths) == g.count_paths((0, w * h - 1))


def test_explicit_limit():
    g = PathGame(PathGameSpec(4, 4, 6, leader_starts=(0,), evader_starts=(15,)))
    with pytest.raises(ValueError):
        g.leader_actions(limit=100)


def test_capture_rules():
    g = PathGame(PVP)
    assert g.caught((0, 1, 2, 5, 8), (8, 5, 4, 5, 8))  # edge 5-8 at step 3, either direction
    assert not g.caught((0, 1, 2, 5, 8), (8, 5, 2, 1, 0))  # edge 2-5, but at different steps
    assert not g.caught((0, 1, 2, 5, 8), (8, 7, 4, 1, 2))
    assert not g.caught(None, (8, 5, 2, 1, 0))
    assert g.leader_payoff((0, 1, 2, 5, 8), (8, 7, 6, 3, 0)) == pytest.approx(-g.rewards[0])
    ex = PathGame(PVP.replace(mode=PATHS_VS_EXIT))
    assert ex.caught((0, 1, 2), 1) and not ex.caught((0, 1, 2), 5)
    cp = PathGame(PVP.replace(mode=CHECKPOINT_VS_PATHS))
    assert cp.caught(5, (8, 5, 4)) and not cp.caught(3, (8, 5, 4))


def test_rewards_respect_ranges():
    g = PathGame(PVP)
    assert np.all((g.rewards[[2, 6]] >= 6) & (g.rewards[[2, 6]] <= 10))
    others = [v for v in range(9) if v not in (2, 6)]
    assert np.all((g.rewards[others] >= 1) & (g.rewards[others] <= 5))
    assert np.array_equal(g.rewards, PathGame(PVP).rewards)


def test_edge_mode_payoff():
    g = PathGame(PathGameSpec(3, 3, 3, leader_starts=(0,), mode=PATHS_VS_EDGES, attacked_edges=2))
    assert len(g.evader_actions()) == 66
    assert g.leader_payoff((0, 1, 0, 1), ((0, 1), (1, 2))) == 1.0
    assert g.leader_payoff((0, 3, 4, 5), ((0, 1), (1, 2))) == 0.0


@pytest.mark.parametrize("mode", [PATHS_VS_PATHS, CHECKPOINT_VS_PATHS, PATHS_VS_EXIT])
def test_best_response_matches_scan(mode):
    spec = PathGameSpec(3, 3, 3, leader_starts=(0, 4), evader_starts=(8, 2), desirable_exits=(6,), seed=2, mode=mode)
    g = PathGame(spec)
    game, rows, cols = g.explicit_game()
    rng = np.random.default_rng(0)
    for _ in range(25):
        x = rng.dirichlet(np.ones(len(rows)) * 0.3)
        x[x < 0.02] = 0.0
        x /= x.sum()
        mixture = [(rows[i], x[i]) for i in np.flatnonzero(x)]
        b, v = path_best_response(g, mixture)
        evader = -(x @ game.a)
        best = int(np.flatnonzero(evader >= evader.max() - 1e-12 * (1 + abs(evader.max())))[0])
        assert v == pytest.approx(evader.max(), abs=1e-9)
        assert b == cols[best]


def test_best_response_requires_distribution():
    with pytest.raises(ValueError):
        path_best_response(PVP, [((0, 1, 2, 5, 8), 0.5)])


def test_initial_evader_action_is_greedy():
    g = PathGame(PVP)
    b, v = g.evader_best_response([(None, 1.0)])
    assert v == pytest.approx(max(g.rewards[p[-1]] for p in g.evader_actions()))
    assert g.initial_evader_action() == b


def test_encode_decode_round_trip():
    g = PathGame(PVP)
    for p in g.leader_actions():
        z = g.encode_leader(p)
        F, rhs = g._flow()
        assert np.allclose(F @ z, rhs)
        assert g.decode_leader(z) == p
    cp = PathGame(PVP.replace(mode=CHECKPOINT_VS_PATHS))
    assert cp.decode_leader(cp.encode_leader(5)) == 5


@pytest.mark.parametrize("mode", [PATHS_VS_PATHS, PATHS_VS_EXIT, CHECKPOINT_VS_PATHS, PATHS_VS_EDGES])
def test_space_payoffs_match_explicit(mode):
    g = PathGame(PVP.replace(depth=3, mode=mode))
    game, rows, cols = g.explicit_game()
    space = g.leader_space(cols)
    for i, r in enumerate(rows):
        z = g.encode_leader(r)
        for j in range(len(cols)):
            assert space.payoff(z, j) == pytest.approx(game.a[i, j])


@pytest.mark.parametrize("k", [1, 2])
def test_large_n_matches_explicit(k):
    g = PathGame(PVP.replace(depth=3))
    game, rows, cols = g.explicit_game()
    _, value, _ = solve_large_n(g.leader_space(cols), k)
    assert value == pytest.approx(solve_k_sparse_brute_force(game, k).value, abs=1e-6)


def test_patrolling_game_frozen_values():
    game, _, _ = gen_path_game(PVP)
    assert game.shape == (48, 48)
    for k, v in PVP_VALUES.items():
        assert solve_k_sparse_zero_sum(game, k).value == pytest.approx(v, abs=1e-6)


def test_combined_and_single_oracle_on_patrolling_game():
    g = gen_path_game(PVP, form="implicit")
    res, trace = combined_solve(g, 2, OracleConfig(epsilon=1e-3))
    assert trace.status == "Converged"
    assert res.value == pytest.approx(PVP_VALUES[2], abs=1e-3)
    assert all(len(p) == PVP.depth + 1 for p in res.actions)
    res2, trace2 = single_oracle_solve(PathColumnOracle(g), 2, OracleConfig(epsilon=1e-3))
    assert trace2.status == "Converged"
    assert res2.value == pytest.approx(PVP_VALUES[2], abs=1e-3)


def test_start_constraint_sets_match_pair_enumeration():
    spec = PathGameSpec(3, 3, 3, leader_starts=(0, 2, 4, 6), mode=PATHS_VS_EXIT, desirable_exits=(8, 1), seed=3)
    game, rows, _ = gen_path_game(spec)
    sets = constraint_sets_from_paths(rows, "start", 2)
    want = -np.inf
    for pair in itertools.combinations(sorted({p[0] for p in rows}), 2):
        allowed = [i for i, p in enumerate(rows) if p[0] in pair]
        want = max(want, solve_support_restricted(game, allowed).value)
    assert solve_structured(game, sets).value == pytest.approx(want, abs=1e-7)


def test_constraint_set_grouping():
    paths = [(0, 1), (0, 3), (2, 1), (2, 5)]
    spec = constraint_sets_from_paths(paths, "both", 1, 2)
    assert spec.sets[0].groups == ((0, 1), (2, 3)) and spec.sets[0].budget == 1
    assert spec.sets[1].groups == ((0, 2), (1,), (3,)) and spec.sets[1].budget == 2
    with pytest.raises(ValueError):
        constraint_sets_from_paths(paths, "middle", 1)


def test_scenario_json_round_trip(tmp_path):
    spec = scenario("large-both-1", depth=3, seed=9)
    spec.save(tmp_path / "s.json")
    assert PathGameSpec.load(tmp_path / "s.json") == spec
    doc = json.loads((tmp_path / "s.json").read_text())
    doc["bogus"] = 1
    with pytest.raises(ValueError):
        PathGameSpec.from_dict(doc)


@pytest.mark.parametrize("name", sorted(SCENARIOS))
def test_presets_are_valid(name):
    spec = scenario(name)
    assert (spec.width, spec.height) == (7, 6)
    g = PathGame(spec)
    assert g.initial_evader_action() is not None
    with pytest.raises(KeyError):
        scenario("campus")


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([PATHS_VS_PATHS, CHECKPOINT_VS_PATHS]))
def test_dp_value_never_below_any_evader_path(seed, mode):
    spec = PathGameSpec(3, 3, 3, leader_starts=(0, 8), evader_starts=(2, 6), desirable_exits=(4,), seed=seed % 50,
                        mode=mode)
    g = PathGame(spec)
    rng = np.random.default_rng(seed)
    rows = g.leader_actions()
    idx = rng.choice(len(rows), size=3, replace=False)
    w = rng.dirichlet(np.ones(3))
    mixture = [(rows[i], w[j]) for j, i in enumerate(idx)]
    _, v = g.evader_best_response(mixture)
    for b in g.evader_actions():
        assert v >= -sum(wt * g.leader_payoff(a, b) for a, wt in mixture) - 1e-9
