"""``sparsecommit`` command line: generate, solve, sweep, compare-uniform.

Exit codes: 0 success, 1 usage error, 2 solver failure, 3 I/O error.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from . import generators as gen
from .experiments import PAIRED_HEADER, SOLVERS, Instance, SweepConfig, compare_uniform, normalize, \
    reference_values, run_sweep, solve_cell, write_csv
from .game import Game
from .paths import SCENARIOS, PathGame, PathGameSpec, scenario

EXIT_USAGE, EXIT_SOLVER, EXIT_IO = 1, 2, 3


class SolverFailure(click.ClickException):
    exit_code = EXIT_SOLVER


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise IOError(f"cannot read {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise IOError(f"{path} is not valid JSON: {e}") from e


def _write(text: str, path: str | None) -> None:
    if path is None:
        click.echo(text, nl=not text.endswith("\n"))
    else:
        Path(path).write_text(text, encoding="utf-8")


@click.group()
def cli():
    """Optimal k-sparse commitments in normal-form games."""


@cli.command()
@click.argument("family", type=click.Choice(["zero-sum", "opposite", "correlated", "counterexample", "biased-mp",
                                             "matching-pennies", "path"]))
@click.option("--n", type=int, default=8, show_default=True, help="Player 1 actions.")
@click.option("--m", type=int, default=None, help="Player 2 actions (defaults to n).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--c", "corr", type=float, default=-0.8, show_default=True, help="Correlation coefficient.")
@click.option("--N", "big_n", type=int, default=4, show_default=True, help="Counterexample size.")
@click.option("--r", "stakes", type=float, default=None, help="Counterexample stakes (default N^2+1).")
@click.option("--a", "bias", type=float, default=0.5, show_default=True, help="Matching-pennies bias.")
@click.option("--scenario", "scenario_name", type=click.Choice(sorted(SCENARIOS)), default=None)
@click.option("--depth", type=int, default=None, help="Override the path-game depth.")
@click.option("--explicit", is_flag=True, help="Path games: write the enumerated bimatrix instead of the scenario.")
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None)
def generate(family, n, m, seed, corr, big_n, stakes, bias, scenario_name, depth, explicit, output):
    """Write a game (or path scenario) as JSON."""
    m = n if m is None else m
    if family == "path":
        spec = scenario(scenario_name or "vanilla", seed=seed)
        if depth is not None:
            spec = spec.replace(depth=depth)
        if not explicit:
            _write(json.dumps(spec.to_dict(), indent=2) + "\n", output)
            return
        game = PathGame(spec).explicit_game()[0]
    elif family == "zero-sum":
        game = gen.gen_random_zero_sum(n, m, seed)
    elif family == "opposite":
        game = gen.gen_random_general_sum_opposite(n, m, seed)
    elif family == "correlated":
        game = gen.gen_random_general_sum_correlated(n, m, corr, seed)
    elif family == "counterexample":
        game = gen.gen_counterexample(gen.CounterexampleParams(big_n, stakes if stakes else big_n ** 2 + 1))
    elif family == "biased-mp":
        game = gen.gen_biased_matching_pennies(gen.BiasedMpParams(bias))
    else:
        game = gen.matching_pennies()
    _write(json.dumps(game.to_dict()) + "\n", output)


def _load_instance(path: str) -> Instance:
    doc = _read_json(path)
    if "A" in doc:
        return Instance(Path(path).stem, Game.from_dict(doc))
    if "width" in doc:
        spec = PathGameSpec.from_dict(doc)
        pg = PathGame(spec)
        try:
            g, rows, cols = pg.explicit_game()
        except ValueError:
            return Instance(Path(path).stem, None, pg)
        return Instance(Path(path).stem, g, pg, rows, cols)
    raise click.UsageError(f"{path} is neither a game file nor a path scenario")


def _jsonable(v):
    if isinstance(v, (tuple, list)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


@cli.command()
@click.argument("input_path", type=click.Path(dir_okay=False))
@click.option("--solver", type=click.Choice(SOLVERS), default="basic", show_default=True)
@click.option("--k", type=int, default=None, help="Support size.")
@click.option("--k1", type=int, default=None, help="Structured: budget on groups.")
@click.option("--k2", type=int, default=None, help="Structured: budget on individual actions.")
@click.option("--epsilon", type=float, default=1e-3, show_default=True, help="Oracle gap tolerance.")
@click.option("--time-limit-ms", type=float, default=None)
@click.option("--group-by", type=click.Choice(["start", "end", "both"]), default="start", show_default=True)
def solve(input_path, solver, k, k1, k2, epsilon, time_limit_ms, group_by):
    """Solve one instance and print the commitment as JSON."""
    if k is None and k1 is None:
        raise click.UsageError("give --k (or --k1 for the structured solver)")
    if epsilon <= 0:
        raise click.BadParameter("must be positive", param_hint="--epsilon")
    inst = _load_instance(input_path)
    kk = k if k is not None else k1
    if kk < 1 or (k2 is not None and k2 < 1):
        raise click.BadParameter("support sizes must be >= 1")
    if inst.game is None and solver != "combined":
        raise click.UsageError("this scenario is too large to enumerate; use --solver combined")
    cfg = SweepConfig({"family": "file"}, (0,), solver, (kk,), time_limit_ms=time_limit_ms)
    try:
        res = solve_cell(inst, solver, kk, k2, mip=cfg.mip_config(), epsilon=epsilon, group_by=group_by)
    except (ValueError, RuntimeError) as e:
        raise SolverFailure(str(e)) from e
    doc = res.to_dict()
    if res.actions is not None:
        doc["actions"] = _jsonable(res.actions)
    doc = {key: _jsonable(v) for key, v in doc.items()}
    click.echo(json.dumps(doc))
    if res.status not in ("Optimal", "TimeLimit") or res.value is None or not math.isfinite(res.value):
        raise SolverFailure(f"solver finished with status {res.status}")


@cli.command()
@click.argument("config_path", type=click.Path(dir_okay=False))
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None,
              help="CSV destination (defaults to the config's output, else stdout).")
def sweep(config_path, output):
    """Run a sweep described by a JSON config and emit CSV records."""
    try:
        cfg = SweepConfig.from_dict(_read_json(config_path))
    except (TypeError, ValueError, KeyError) as e:
        raise click.UsageError(f"bad sweep config: {e}") from e
    records = run_sweep(cfg)
    has_base = all(any(r.instance == inst and r.k == 1 and r.value is not None for r in records)
                   for inst in {r.instance for r in records})
    if has_base and cfg.solver not in ("combined",):
        normalize(records, reference_values(cfg))
    _write(write_csv(records), output or cfg.output)


@cli.command("compare-uniform")
@click.argument("config_path", type=click.Path(dir_okay=False))
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None)
def compare_uniform_cmd(config_path, output):
    """Paired k-sparse and k-uniform values for a zero-sum sweep."""
    try:
        cfg = SweepConfig.from_dict(_read_json(config_path))
    except (TypeError, ValueError, KeyError) as e:
        raise click.UsageError(f"bad sweep config: {e}") from e
    pairs = compare_uniform(cfg)
    _write(write_csv(pairs, header=PAIRED_HEADER), output or cfg.output)


def main(argv=None) -> int:
    """Entry point with the documented exit codes."""
    try:
        rv = cli.main(args=argv, prog_name="sparsecommit", standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except SolverFailure as e:
        e.show()
        return EXIT_SOLVER
    except (click.UsageError, click.exceptions.Abort) as e:
        if isinstance(e, click.UsageError):
            e.show()
        return EXIT_USAGE
    except (IOError, OSError) as e:
        click.echo(f"Error: {e}", err=True)
        return EXIT_IO
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except ValueError as e:
        click.echo(f"Error: {e}", err=True)
        return EXIT_USAGE
    return rv if isinstance(rv, int) else 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
