import json

import pytest

from sparsecommit.cli import main
from sparsecommit.experiments import read_csv


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_help(capsys):
    code, out, _ = run(capsys, "--help")
    assert code == 0 and "compare-uniform" in out


def test_generate_and_solve_round_trip(tmp_path, capsys):
    f = tmp_path / "g.json"
    assert run(capsys, "generate", "zero-sum", "--n", "6", "--seed", "3", "-o", str(f))[0] == 0
    code, out, _ = run(capsys, "solve", str(f), "--k", "2")
    assert code == 0
    doc = json.loads(out)
    assert doc["status"] == "Optimal" and len(doc["support"]) <= 2
    code, out2, _ = run(capsys, "solve", str(f), "--k", "2", "--solver", "brute-force")
    assert json.loads(out2)["value"] == pytest.approx(doc["value"], abs=1e-6)


def test_generate_to_stdout(capsys):
    code, out, _ = run(capsys, "generate", "biased-mp", "--a", "0.5")
    assert code == 0 and json.loads(out)["A"] == [[2.0, -1.0], [-2.0, 2.0]]


def test_path_scenario_and_combined(tmp_path, capsys):
    f = tmp_path / "s.json"
    assert run(capsys, "generate", "path", "--scenario", "large-both-0", "--depth", "2", "-o", str(f))[0] == 0
    assert json.loads(f.read_text())["depth"] == 2
    code, out, _ = run(capsys, "solve", str(f), "--solver", "combined", "--k", "2")
    assert code == 0
    doc = json.loads(out)
    assert all(len(p) == 3 for p in doc["actions"])


def test_usage_errors(tmp_path, capsys):
    f = tmp_path / "g.json"
    run(capsys, "generate", "matching-pennies", "-o", str(f))
    assert run(capsys, "solve", str(f))[0] == 1
    assert run(capsys, "solve", str(f), "--k", "0")[0] == 1
    assert run(capsys, "solve", str(f), "--k", "1", "--epsilon", "-1")[0] == 1
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys, "generate", "zero-sum", "--n", "0")[0] == 1


def test_io_errors(tmp_path, capsys):
    assert run(capsys, "solve", str(tmp_path / "missing.json"), "--k", "1")[0] == 3
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "solve", str(bad), "--k", "1")[0] == 3
    assert run(capsys, "sweep", str(tmp_path / "nothing.json"))[0] == 3


def test_solver_failure(tmp_path, capsys):
    f = tmp_path / "g.json"
    run(capsys, "generate", "opposite", "--n", "3", "-o", str(f))
    code, _, err = run(capsys, "solve", str(f), "--k", "1")
    assert code == 2 and "zero-sum" in err


def test_sweep_writes_normalized_csv(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"generator": {"family": "zero-sum", "n": 5, "m": 5}, "seeds": [0, 1], "ks": [1, 2]}))
    out = tmp_path / "out.csv"
    assert run(capsys, "sweep", str(cfg), "-o", str(out))[0] == 0
    recs = read_csv(out)
    assert len(recs) == 4
    assert all(r.u_norm is not None for r in recs)
    assert [r.u_norm for r in recs if r.k == 1] == [0.0, 0.0]


def test_bad_sweep_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"generator": {"family": "zero-sum", "n": 5, "m": 5}, "seeds": [0]}))
    assert run(capsys, "sweep", str(cfg))[0] == 1


def test_compare_uniform_command(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"generator": {"family": "zero-sum", "n": 4, "m": 4}, "seeds": [0], "ks": [1, 2]}))
    code, out, _ = run(capsys, "compare-uniform", str(cfg))
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("instance,n,m,k,sparse_value") and len(lines) == 3
