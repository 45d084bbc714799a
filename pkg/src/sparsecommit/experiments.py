"""Sweeps over support sizes, utility normalization and CSV records."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import generators as gen
from .game import CommitmentResult, Game, MixedStrategy, SolveStats, pure_maximin
from .mip import MipConfig
from .oracle import MatrixImplicitGame, MatrixOracle, OracleConfig, combined_solve, explicit_space, \
    single_oracle_solve, solve_large_n
from .paths import PathColumnOracle, PathGame, PathGameSpec, constraint_sets_from_paths, scenario
from .sparse import DEFAULT_CONFIG, equilibrium_value, singleton_sets, solve_k_sparse_brute_force, \
    solve_k_sparse_zero_sum, solve_k_uniform, solve_stackelberg_multiple, solve_stackelberg_single, \
    solve_structured

SOLVERS = ("basic", "structured", "stackelberg-multi", "stackelberg-single", "k-uniform",
           "single-oracle", "large-n", "combined", "brute-force")
STATUSES = ("Optimal", "TimeLimit", "Infeasible", "Incomplete")
CSV_HEADER = ("instance", "n", "m", "k", "k2", "value", "u_norm", "time_ms", "nodes", "lp_solves", "status")
PAIRED_HEADER = ("instance", "n", "m", "k", "sparse_value", "uniform_value", "sparse_u_norm", "uniform_u_norm")

_FAMILIES = ("zero-sum", "opposite", "correlated", "counterexample", "biased-mp", "matching-pennies", "path", "file")


@dataclass(frozen=True)
class SweepConfig:
    """What to generate, which solver to run, and over which support sizes.

    ``generator`` is a dict with a ``family`` key plus family parameters,
    e.g. ``{"family": "zero-sum", "n": 30, "m": 30}`` or
    ``{"family": "path", "scenario": "vanilla", "depth": 3}``.
    """

    generator: dict
    seeds: tuple[int, ...]
    solver: str = "basic"
    ks: tuple[int, ...] = ()
    k_grid: tuple[tuple[int, int], ...] = ()
    time_limit_ms: float | None = None
    epsilon: float = 1e-3
    group_by: str = "start"
    output: str | None = None
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "ks", tuple(int(k) for k in self.ks))
        object.__setattr__(self, "k_grid", tuple((int(a), int(b)) for a, b in self.k_grid))
        if not self.seeds:
            raise ValueError("seed list must be nonempty")
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}; choose from {SOLVERS}")
        if not self.ks and not self.k_grid:
            raise ValueError("give a k range or a (k1, k2) grid")
        if any(k < 1 for k in self.ks) or any(a < 1 or b < 1 for a, b in self.k_grid):
            raise ValueError("support sizes must be >= 1")
        if self.generator.get("family") not in _FAMILIES:
            raise ValueError(f"generator family must be one of {_FAMILIES}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @property
    def cells(self) -> list[tuple[int, int | None]]:
        return [(k, None) for k in self.ks] + [(a, b) for a, b in self.k_grid]

    def mip_config(self) -> MipConfig:
        limit = None if self.time_limit_ms is None else self.time_limit_ms / 1000.0
        return MipConfig(time_limit=limit, abs_gap=DEFAULT_CONFIG.abs_gap, rel_gap=DEFAULT_CONFIG.rel_gap)

    @classmethod
    def from_dict(cls, doc: dict) -> "SweepConfig":
        doc = dict(doc)
        doc["seeds"] = tuple(doc.get("seeds", ()))
        doc["ks"] = tuple(doc.get("ks", ()))
        doc["k_grid"] = tuple(tuple(p) for p in doc.get("k_grid", ()))
        unknown = set(doc) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"unknown sweep config fields: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def load(cls, path) -> "SweepConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class RunRecord:
    instance: str
    n: int
    m: int
    k: int
    k2: int | None
    value: float | None
    u_norm: float | None
    time_ms: float
    nodes: int
    lp_solves: int
    status: str


@dataclass
class Instance:
    """One generated game; path games keep their implicit view as well."""

    id: str
    game: Game | None
    path_game: PathGame | None = None
    rows: list | None = None
    cols: list | None = None

    @property
    def shape(self) -> tuple[int, int]:
        if self.game is not None:
            return self.game.shape
        pg = self.path_game
        n = pg.count_paths(pg.spec.leader_starts) if pg.leader_is_path else pg.spec.num_vertices
        return n, len(pg.evader_actions(limit=math.inf))


def _path_spec(doc: dict, seed: int) -> PathGameSpec:
    params = {k: v for k, v in doc.items() if k not in ("family", "scenario", "explicit")}
    if "scenario" in doc:
        return scenario(doc["scenario"], seed=seed, **params)
    return PathGameSpec(seed=seed, **params)


def make_instance(generator: dict, seed: int, explicit: bool = True) -> Instance:
    fam = generator["family"]
    p = {k: v for k, v in generator.items() if k != "family"}
    iid = f"{fam}-s{seed}"
    if fam == "zero-sum":
        return Instance(iid, gen.gen_random_zero_sum(p["n"], p["m"], seed))
    if fam == "opposite":
        return Instance(iid, gen.gen_random_general_sum_opposite(p["n"], p["m"], seed))
    if fam == "correlated":
        return Instance(iid, gen.gen_random_general_sum_correlated(
            p["n"], p["m"], p["c"], seed, noise_halfwidth=p.get("noise_halfwidth", 85.0)))
    if fam == "counterexample":
        N = p["N"]
        return Instance(iid, gen.gen_counterexample(gen.CounterexampleParams(N, p.get("r", N * N + 1))))
    if fam == "biased-mp":
        return Instance(iid, gen.gen_biased_matching_pennies(gen.BiasedMpParams(p["a"])))
    if fam == "matching-pennies":
        return Instance(iid, gen.matching_pennies())
    if fam == "file":
        return Instance(iid, Game.load(p["path"]))
    if fam == "path":
        pg = PathGame(_path_spec(generator, seed))
        if explicit and generator.get("explicit", True):
            g, rows, cols = pg.explicit_game()
            return Instance(iid, g, pg, rows, cols)
        return Instance(iid, None, pg)
    raise ValueError(f"unknown family {fam!r}")


def _status(res: CommitmentResult) -> str:
    s = res.status
    if s in STATUSES:
        return s
    return "Incomplete"


def solve_cell(inst: Instance, solver: str, k: int, k2: int | None = None, *, mip: MipConfig | None = None,
               epsilon: float = 1e-3, group_by: str = "start") -> CommitmentResult:
    """Run one solver on one instance; raises on invalid combinations."""
    mip = mip or DEFAULT_CONFIG
    game = inst.game
    if solver == "basic":
        return solve_k_sparse_zero_sum(game, k, mip)
    if solver == "brute-force":
        return solve_k_sparse_brute_force(game, k)
    if solver == "structured":
        if inst.rows is not None and inst.path_game is not None and inst.path_game.leader_is_path:
            spec = constraint_sets_from_paths(inst.rows, group_by, k)
        else:
            spec = singleton_sets(game.n, k)
        if k2 is not None:
            spec = spec + singleton_sets(game.n, k2)
        return solve_structured(game, spec, mip)
    if solver == "stackelberg-multi":
        return solve_stackelberg_multiple(game, k, mip)
    if solver == "stackelberg-single":
        return solve_stackelberg_single(game, k, mip)
    if solver == "k-uniform":
        return solve_k_uniform(game, k, mip)
    ocfg = OracleConfig(epsilon=epsilon, mip=mip)
    if solver == "single-oracle":
        oracle = PathColumnOracle(inst.path_game) if inst.path_game is not None else MatrixOracle(game)
        return single_oracle_solve(oracle, k, ocfg)[0]
    if solver == "large-n":
        start = time.perf_counter()
        if inst.path_game is not None:
            pg = inst.path_game
            space = pg.leader_space(pg.evader_actions())
            decode = pg.decode_leader
        else:
            space = explicit_space(game)
            decode = MatrixImplicitGame(game).decode_leader
        mixture, value, out = solve_large_n(space, k, mip)
        probs = np.array([w for _, w in mixture]) if mixture else np.array([1.0])
        status = {"Optimal": "Optimal", "TimeLimit": "TimeLimit", "Infeasible": "Infeasible"}.get(
            out.status.value, "Incomplete")
        return CommitmentResult(MixedStrategy(probs / probs.sum()), value, status, None,
                                SolveStats(out.nodes_explored, out.lp_solves, out.best_bound),
                                time.perf_counter() - start, k, actions=[decode(z) for z, _ in mixture])
    if solver == "combined":
        target = inst.path_game if inst.path_game is not None else MatrixImplicitGame(game)
        return combined_solve(target, k, ocfg)[0]
    raise ValueError(f"unknown solver {solver!r}")


def _record(inst: Instance, n: int, m: int, k: int, k2, run) -> RunRecord:
    start = time.perf_counter()
    try:
        res = run()
    except Exception:  # noqa: BLE001 - a failing cell must not abort the sweep
        return RunRecord(inst.id, n, m, k, k2, None, None, (time.perf_counter() - start) * 1e3, 0, 0, "Incomplete")
    value = None if res.value is None or not math.isfinite(res.value) else float(res.value)
    return RunRecord(inst.id, n, m, k, k2, value, None, (time.perf_counter() - start) * 1e3,
                     res.stats.nodes, res.stats.lp_solves, _status(res))


def run_sweep(config: SweepConfig) -> list[RunRecord]:
    """One record per (seed, cell), ordered by seed then cell."""
    explicit = config.solver not in ("combined",) or config.generator.get("family") != "path"
    instances = [make_instance(config.generator, s, explicit) for s in config.seeds]
    mip = config.mip_config()
    jobs = []
    for inst in instances:
        n, m = inst.shape
        for k, k2 in config.cells:
            def run(inst=inst, k=k, k2=k2):
                return solve_cell(inst, config.solver, k, k2, mip=mip, epsilon=config.epsilon,
                                  group_by=config.group_by)
            jobs.append((inst, n, m, k, k2, run))
    if config.workers == 1:
        return [_record(*j) for j in jobs]
    with ThreadPoolExecutor(config.workers) as pool:
        return list(pool.map(lambda j: _record(*j), jobs))


def reference_values(config: SweepConfig) -> dict[str, float]:
    """Unconstrained equilibrium value of each instance (NE or SSE)."""
    out = {}
    for s in config.seeds:
        inst = make_instance(config.generator, s)
        out[inst.id] = equilibrium_value(inst.game)
    return out


@dataclass
class NormalizationReport:
    ks: list[int]
    u_norm_mean: dict[int, float]
    u_norm_se: dict[int, float]
    t_norm_mean: dict[int, float]
    t_norm_se: dict[int, float]
    u_min: dict[str, float]
    u_equi: dict[str, float]
    t_min: float
    t_max: float
    per_record: list[float | None] = field(default_factory=list)


def _se(values: list[float]) -> float:
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1) / math.sqrt(len(values)))


def normalize(records: list[RunRecord], reference: dict[str, float]) -> NormalizationReport:
    """Per-instance normalized utility and per-sweep normalized time, averaged per k.

    ``u_norm = (u - u(k=1)) / (u_equi - u(k=1))``; an instance whose
    equilibrium value equals its k=1 value gets ``u_norm = 1`` everywhere.
    Fills ``record.u_norm`` in place.
    """
    u_min: dict[str, float] = {}
    for r in records:
        if r.k == 1 and r.k2 is None and r.value is not None:
            u_min[r.instance] = r.value
    missing = {r.instance for r in records} - set(u_min)
    if missing:
        raise ValueError(f"instances without a k=1 value: {sorted(missing)}")
    missing = {r.instance for r in records} - set(reference)
    if missing:
        raise ValueError(f"instances without a reference equilibrium value: {sorted(missing)}")
    times = [r.time_ms for r in records]
    t_min, t_max = min(times), max(times)
    per_u: dict[int, list[float]] = {}
    per_t: dict[int, list[float]] = {}
    per_record = []
    for r in records:
        lo, hi = u_min[r.instance], reference[r.instance]
        if r.value is None:
            un = None
        elif abs(hi - lo) <= 1e-12 * (1 + abs(hi)):
            un = 1.0
        else:
            un = (r.value - lo) / (hi - lo)
        r.u_norm = un
        per_record.append(un)
        tn = 0.0 if t_max == t_min else (r.time_ms - t_min) / (t_max - t_min)
        per_t.setdefault(r.k, []).append(tn)
        if un is not None:
            per_u.setdefault(r.k, []).append(un)
    ks = sorted(per_t)
    return NormalizationReport(
        ks,
        {k: float(np.mean(per_u[k])) if per_u.get(k) else math.nan for k in ks},
        {k: _se(per_u.get(k, [])) for k in ks},
        {k: float(np.mean(per_t[k])) for k in ks},
        {k: _se(per_t[k]) for k in ks},
        u_min, dict(reference), t_min, t_max, per_record)


@dataclass
class PairedRecord:
    instance: str
    n: int
    m: int
    k: int
    sparse_value: float
    uniform_value: float
    sparse_u_norm: float | None = None
    uniform_u_norm: float | None = None


def compare_uniform(config: SweepConfig) -> list[PairedRecord]:
    """Optimal k-sparse value next to the best k-uniform value for each cell.

    Normalized utilities use the k-sparse k=1 value (both methods agree at
    k=1) and the equilibrium value of the instance.
    """
    mip = config.mip_config()
    out = []
    for s in config.seeds:
        inst = make_instance(config.generator, s)
        g = inst.game
        ref = equilibrium_value(g)
        lo = pure_maximin(g.a)[1]
        for k in config.ks:
            sp = solve_k_sparse_zero_sum(g, k, mip).value
            un = solve_k_uniform(g, k, mip).value
            flat = abs(ref - lo) <= 1e-12 * (1 + abs(ref))
            out.append(PairedRecord(inst.id, g.n, g.m, k, sp, un,
                                    1.0 if flat else (sp - lo) / (ref - lo),
                                    1.0 if flat else (un - lo) / (ref - lo)))
    return out


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(records, path=None, header=CSV_HEADER) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in records:
        d = asdict(r)
        w.writerow([_fmt(d[h]) for h in header])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def read_csv(source) -> list[RunRecord]:
    """Parse records from a path or from CSV text."""
    text = source if isinstance(source, str) and "\n" in source else Path(source).read_text(encoding="utf-8")
    rows = list(csv.DictReader(io.StringIO(text)))
    if rows and tuple(rows[0].keys()) != CSV_HEADER:
        raise ValueError("unexpected CSV header")

    def opt(conv, s):
        return None if s == "" else conv(s)

    return [RunRecord(r["instance"], int(r["n"]), int(r["m"]), int(r["k"]), opt(int, r["k2"]),
                      opt(float, r["value"]), opt(float, r["u_norm"]), float(r["time_ms"]), int(r["nodes"]),
                      int(r["lp_solves"]), r["status"]) for r in rows]
