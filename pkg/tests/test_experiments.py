import math

import pytest

from sparsecommit.experiments import (CSV_HEADER, PAIRED_HEADER, RunRecord, SweepConfig, compare_uniform,
                                      make_instance, normalize, read_csv, reference_values, run_sweep, solve_cell,
                                      write_csv)


def zs(n=6, m=6, seeds=(0, 1, 2), ks=(1, 2, 3), **kw):
    return SweepConfig({"family": "zero-sum", "n": n, "m": m}, seeds, ks=ks, **kw)


def test_sweep_config_validation():
    with pytest.raises(ValueError):
        SweepConfig({"family": "zero-sum"}, (), ks=(1,))
    with pytest.raises(ValueError):
        SweepConfig({"family": "zero-sum"}, (0,), solver="simulated-annealing", ks=(1,))
    with pytest.raises(ValueError):
        SweepConfig({"family": "zero-sum"}, (0,))
    with pytest.raises(ValueError):
        SweepConfig({"family": "zero-sum"}, (0,), ks=(0,))
    with pytest.raises(ValueError):
        SweepConfig({"family": "dice"}, (0,), ks=(1,))
    with pytest.raises(ValueError):
        SweepConfig.from_dict({"generator": {"family": "zero-sum"}, "seeds": [0], "ks": [1], "colour": "red"})


def test_sweep_emits_one_record_per_cell():
    records = run_sweep(zs())
    assert len(records) == 9
    assert [(r.instance, r.k) for r in records][:3] == [("zero-sum-s0", 1), ("zero-sum-s0", 2), ("zero-sum-s0", 3)]
    assert all(r.status == "Optimal" and r.value is not None for r in records)
    assert all(r.lp_solves >= 1 for r in records)


def test_parallel_sweep_keeps_order_and_values():
    serial = run_sweep(zs())
    parallel = run_sweep(zs(workers=3))
    assert [(r.instance, r.k, r.value) for r in serial] == [(r.instance, r.k, r.value) for r in parallel]


def test_brute_force_and_basic_agree():
    basic = run_sweep(zs(n=7, m=5, ks=(1, 2, 3)))
    brute = run_sweep(zs(n=7, m=5, ks=(1, 2, 3), solver="brute-force"))
    for a, b in zip(basic, brute):
        assert a.value == pytest.approx(b.value, abs=1e-6)


def test_k_grid_cells():
    cfg = SweepConfig({"family": "zero-sum", "n": 5, "m": 5}, (0,), solver="structured", k_grid=((2, 1), (3, 2)))
    recs = run_sweep(cfg)
    assert [(r.k, r.k2) for r in recs] == [(2, 1), (3, 2)]
    assert recs[1].value >= recs[0].value - 1e-9


def test_failed_cell_becomes_incomplete():
    recs = run_sweep(SweepConfig({"family": "opposite", "n": 3, "m": 3}, (0,), solver="basic", ks=(1,)))
    assert recs[0].status == "Incomplete" and recs[0].value is None


def test_counterexample_normalization():
    cfg = SweepConfig({"family": "counterexample", "N": 5}, (0,), ks=(1, 2, 3, 4, 5))
    recs = run_sweep(cfg)
    report = normalize(recs, reference_values(cfg))
    lo = 2.0 ** -4 - 26.0  # best pure action: block 2, matched by the opponent
    hi = 0.5
    assert report.u_min["counterexample-s0"] == pytest.approx(lo)
    assert report.u_equi["counterexample-s0"] == pytest.approx(hi)
    for r in recs:
        want = 0.0 if r.k == 1 else (2.0 ** (r.k - 6) - lo) / (hi - lo)
        assert r.u_norm == pytest.approx(want, abs=1e-9)
    assert report.u_norm_mean[5] == pytest.approx(1.0, abs=1e-9)
    assert report.u_norm_se[5] == 0.0


def test_flat_instance_normalizes_to_one():
    recs = [RunRecord("flat", 2, 2, k, None, 3.0, None, 1.0 + k, 0, 1, "Optimal") for k in (1, 2)]
    report = normalize(recs, {"flat": 3.0})
    assert [r.u_norm for r in recs] == [1.0, 1.0]
    assert report.t_norm_mean == {1: 0.0, 2: 1.0}


def test_normalize_needs_k_one():
    recs = [RunRecord("x", 2, 2, 2, None, 1.0, None, 1.0, 0, 1, "Optimal")]
    with pytest.raises(ValueError):
        normalize(recs, {"x": 2.0})


def test_compare_uniform_biased_pennies():
    cfg = SweepConfig({"family": "biased-mp", "a": 0.5}, (0,), ks=(1, 2))
    pairs = compare_uniform(cfg)
    k2 = pairs[1]
    assert k2.sparse_value == pytest.approx(2 / 7, abs=1e-9)
    assert k2.uniform_value == pytest.approx(0.0, abs=1e-9)
    assert k2.sparse_u_norm == pytest.approx(1.0)
    assert k2.uniform_u_norm == pytest.approx(7 / 9)
    assert write_csv(pairs, header=PAIRED_HEADER).splitlines()[0] == ",".join(PAIRED_HEADER)


def test_csv_round_trip(tmp_path):
    recs = run_sweep(zs(seeds=(4,)))
    recs.append(RunRecord("broken", 3, 3, 2, 1, None, None, 0.5, 0, 0, "Incomplete"))
    text = write_csv(recs, tmp_path / "out.csv")
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    assert read_csv(tmp_path / "out.csv") == recs
    assert read_csv(text) == recs
    with pytest.raises(ValueError):
        read_csv("a,b\n1,2\n")


def test_path_instances():
    inst = make_instance({"family": "path", "scenario": "vanilla", "depth": 2}, 0)
    assert inst.game is not None and inst.shape == inst.game.shape
    res = solve_cell(inst, "structured", 2)
    assert res.status == "Optimal" and math.isfinite(res.value)
    lazy = make_instance({"family": "path", "scenario": "large-both-0", "depth": 2}, 0, explicit=False)
    assert lazy.game is None and lazy.shape[0] > 0


def test_every_solver_runs_on_a_small_game():
    inst = make_instance({"family": "zero-sum", "n": 5, "m": 5}, 2)
    want = solve_cell(inst, "basic", 2).value
    for solver in ("brute-force", "structured", "single-oracle", "large-n", "combined"):
        assert solve_cell(inst, solver, 2).value == pytest.approx(want, abs=1e-3), solver
    assert solve_cell(inst, "k-uniform", 2).value <= want + 1e-9
    with pytest.raises(ValueError):
        solve_cell(inst, "nope", 2)
