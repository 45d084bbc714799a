"""Optimal k-sparse commitments: MILP formulations and exact baselines."""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .game import (CommitmentResult, Game, MixedStrategy, SolveStats, _stackelberg_lp, maximin_model,
                   nash_zero_sum, pure_maximin, sse_unconstrained)
from .lp import LpStatus, lp_solve
from .mip import BINARY, INTEGER, MilpModel, MipConfig, MipOutcome, MipStatus, ModelBuilder, mip_solve

# Tighter than the engine default so MILP values agree with enumeration to ~1e-9.
DEFAULT_CONFIG = MipConfig(rel_gap=1e-9, abs_gap=1e-9)
BRUTE_FORCE_LIMIT = 10**6


@dataclass(frozen=True)
class ConstraintSet:
    groups: tuple[tuple[int, ...], ...]
    budget: int


@dataclass(frozen=True)
class ConstraintSetSpec:
    """Budgets on how many action groups may carry positive probability."""

    sets: tuple[ConstraintSet, ...] = field(default_factory=tuple)

    @classmethod
    def of(cls, *sets: tuple[list, int]) -> "ConstraintSetSpec":
        return cls(tuple(ConstraintSet(tuple(tuple(int(a) for a in g) for g in groups), int(k))
                         for groups, k in sets))

    def __add__(self, other: "ConstraintSetSpec") -> "ConstraintSetSpec":
        return ConstraintSetSpec(self.sets + other.sets)

    def validate(self, n: int) -> None:
        for s in self.sets:
            if s.budget < 1:
                raise ValueError("every constraint set needs a budget k_i >= 1")
            for g in s.groups:
                if any(a < 0 or a >= n for a in g):
                    raise ValueError(f"action index out of range in group {g}")


def singleton_sets(n: int, k: int) -> ConstraintSetSpec:
    return ConstraintSetSpec.of(([[a] for a in range(n)], k))


def _check_k(k: int, n: int, allow_above: bool = False) -> None:
    if k < 1 or (not allow_above and k > n):
        raise ValueError(f"k must be in [1, {n}], got {k}")


def _result_from_x(game: Game, x: np.ndarray, k, status, stats, start, follower=None) -> CommitmentResult:
    strategy = MixedStrategy.from_weights(x)
    if follower is None:
        value = float((strategy.probs @ game.a).min())
    else:
        value = float(strategy.probs @ game.a[:, follower])
    return CommitmentResult(strategy, value, status, follower, stats, time.perf_counter() - start, k)


def _stats(out: MipOutcome) -> SolveStats:
    return SolveStats(out.nodes_explored, out.lp_solves, out.best_bound)


def _status_name(out: MipOutcome) -> str:
    return out.status.value


def _require_zero_sum(game: Game) -> None:
    if not game.zero_sum:
        raise ValueError("this formulation is for zero-sum games")


def _add_payoff_rows(mb: ModelBuilder, a: np.ndarray, xs: np.ndarray, g: int) -> None:
    for b in range(a.shape[1]):
        mb.add_row(np.r_[g, xs], np.r_[1.0, -a[:, b]], "<=", 0.0)


def build_basic_milp(game: Game, k: int) -> MilpModel:
    """(B): max g s.t. g <= A^T x, x in the simplex, x <= z, sum z <= k, z binary.

    Variables are ordered ``x_0..x_{n-1}, z_0..z_{n-1}, g``.
    """
    _require_zero_sum(game)
    n, m = game.shape
    _check_k(k, n)
    mb = ModelBuilder()
    xs = mb.add_vars(n, 0.0, 1.0)
    zs = mb.add_vars(n, 0.0, 1.0, kind=BINARY)
    g = mb.add_var(-math.inf, math.inf, obj=1.0)
    mb.add_row(xs, 1.0, "==", 1.0)
    mb.add_row(zs, 1.0, "<=", k)
    for a in range(n):
        mb.add_row([zs[a], xs[a]], [1.0, -1.0], ">=", 0.0)
    _add_payoff_rows(mb, game.a, xs, g)
    return mb.build()


def _solve_maximin_lp(game: Game, k, start) -> CommitmentResult:
    out = lp_solve(maximin_model(game.a))
    return _result_from_x(game, out.solution[: game.n], k, "Optimal",
                          SolveStats(0, 1, out.objective_value), start)


def solve_k_sparse_zero_sum(game: Game, k: int, config: MipConfig | None = None) -> CommitmentResult:
    """Optimal commitment over strategies with at most ``k`` actions in the support."""
    start = time.perf_counter()
    _require_zero_sum(game)
    _check_k(k, game.n, allow_above=True)
    if k >= game.n:
        return _solve_maximin_lp(game, k, start)
    out = mip_solve(build_basic_milp(game, k), config or DEFAULT_CONFIG)
    if not out.has_solution:
        return CommitmentResult(MixedStrategy.uniform(game.n), math.nan, _status_name(out),
                                stats=_stats(out), wall_time=time.perf_counter() - start, k=k)
    return _result_from_x(game, out.incumbent[: game.n], k, _status_name(out), _stats(out), start)


def solve_support_restricted(game: Game, allowed) -> CommitmentResult:
    """Maximin LP over strategies supported inside ``allowed``."""
    start = time.perf_counter()
    allowed = sorted({int(a) for a in allowed})
    if not allowed:
        raise ValueError("allowed action set must be nonempty")
    if allowed[0] < 0 or allowed[-1] >= game.n:
        raise ValueError("allowed action index out of range")
    model = maximin_model(game.a)
    upper = np.r_[np.zeros(game.n), np.inf]
    upper[allowed] = 1.0
    out = lp_solve(model.with_bounds(model.lower, upper))
    return _result_from_x(game, out.solution[: game.n], len(allowed), "Optimal",
                          SolveStats(0, 1, out.objective_value), start)


def solve_k_sparse_brute_force(game: Game, k: int) -> CommitmentResult:
    """Exact k-sparse optimum by one LP per support.

    Supports of size exactly ``min(k, n)`` suffice, since the restricted LP
    may leave actions at zero. The first best support in lexicographic order
    wins.
    """
    start = time.perf_counter()
    n = game.n
    _check_k(k, n, allow_above=True)
    size = min(k, n)
    if math.comb(n, size) > BRUTE_FORCE_LIMIT:
        raise ValueError(f"C({n},{size}) supports exceeds the enumeration guard of {BRUTE_FORCE_LIMIT}")
    model = maximin_model(game.a)
    best_val, best_x = -math.inf, None
    count = 0
    for support in itertools.combinations(range(n), size):
        upper = np.r_[np.zeros(n), np.inf]
        upper[list(support)] = 1.0
        out = lp_solve(model.with_bounds(model.lower, upper))
        count += 1
        if out.objective_value > best_val + 1e-12:
            best_val, best_x = out.objective_value, out.solution[:n]
    return _result_from_x(game, best_x, k, "Optimal", SolveStats(0, count, best_val), start)


def build_structured_milp(game: Game, spec: ConstraintSetSpec) -> MilpModel:
    """(S) with the (B) payoff objective: one binary per action group."""
    _require_zero_sum(game)
    n = game.n
    spec.validate(n)
    mb = ModelBuilder()
    xs = mb.add_vars(n, 0.0, 1.0)
    g = mb.add_var(-math.inf, math.inf, obj=1.0)
    mb.add_row(xs, 1.0, "==", 1.0)
    for cset in spec.sets:
        zs = mb.add_vars(len(cset.groups), 0.0, 1.0, kind=BINARY)
        mb.add_row(zs, 1.0, "<=", cset.budget)
        for zj, group in zip(zs, cset.groups):
            for a in group:
                mb.add_row([zj, xs[a]], [1.0, -1.0], ">=", 0.0)
    _add_payoff_rows(mb, game.a, xs, g)
    return mb.build()


def solve_structured(game: Game, spec: ConstraintSetSpec, config: MipConfig | None = None) -> CommitmentResult:
    start = time.perf_counter()
    out = mip_solve(build_structured_milp(game, spec), config or DEFAULT_CONFIG)
    if not out.has_solution:
        return CommitmentResult(MixedStrategy.uniform(game.n), math.nan, _status_name(out),
                                stats=_stats(out), wall_time=time.perf_counter() - start)
    return _result_from_x(game, out.incumbent[: game.n], None, _status_name(out), _stats(out), start)


def build_stackelberg_milp(game: Game, k: int, b: int) -> MilpModel:
    """(G) for follower action ``b``: variables ``x, z``."""
    n, m = game.shape
    _check_k(k, n)
    mb = ModelBuilder()
    xs = mb.add_vars(n, 0.0, 1.0, obj=game.a[:, b])
    zs = mb.add_vars(n, 0.0, 1.0, kind=BINARY)
    mb.add_row(xs, 1.0, "==", 1.0)
    mb.add_row(zs, 1.0, "<=", k)
    for a in range(n):
        mb.add_row([zs[a], xs[a]], [1.0, -1.0], ">=", 0.0)
    for bp in range(m):
        if bp != b:
            mb.add_row(xs, game.b[:, bp] - game.b[:, b], "<=", 0.0)
    return mb.build()


def solve_stackelberg_multiple(game: Game, k: int, config: MipConfig | None = None) -> CommitmentResult:
    """k-sparse strong Stackelberg commitment by one MILP per follower action."""
    start = time.perf_counter()
    n = game.n
    _check_k(k, n, allow_above=True)
    if k >= n:
        res = sse_unconstrained(game)
        res.k = k
        return res
    config = config or DEFAULT_CONFIG
    best = None
    nodes = lps = 0
    limited = False
    for b in range(game.m):
        out = mip_solve(build_stackelberg_milp(game, k, b), config)
        nodes += out.nodes_explored
        lps += out.lp_solves
        if out.status in (MipStatus.NODE_LIMIT, MipStatus.TIME_LIMIT):
            limited = True
        if not out.has_solution:
            continue
        if best is None or out.objective_value > best[0] + 1e-9 * (1 + abs(best[0])):
            best = (out.objective_value, b, out.incumbent[:n])
    status = "TimeLimit" if limited else "Optimal"
    if best is None:
        return CommitmentResult(MixedStrategy.uniform(n), math.nan, "TimeLimit" if limited else "Infeasible",
                                stats=SolveStats(nodes, lps, math.nan),
                                wall_time=time.perf_counter() - start, k=k)
    value, b, x = best
    return _result_from_x(game, x, k, status, SolveStats(nodes, lps, value), start, follower=b)


def big_m(game: Game) -> float:
    return float(game.b.max() - game.b.min())


def build_stackelberg_single_milp(game: Game, k: int) -> MilpModel:
    """One MILP for the k-sparse strong Stackelberg commitment.

    Variables: ``x (n), z (n), y (m), r (n*m, row-major in a), s (m)``.
    ``r(a, b)`` equals ``x(a)`` on the selected follower column and zero
    elsewhere; ``s_b'`` is the follower's regret of ``b'`` against it.
    """
    n, m = game.shape
    _check_k(k, n, allow_above=True)
    A, B = game.a, game.b
    M = big_m(game)
    mb = ModelBuilder()
    xs = mb.add_vars(n, 0.0, 1.0)
    zs = mb.add_vars(n, 0.0, 1.0, kind=BINARY)
    ys = mb.add_vars(m, 0.0, 1.0, kind=BINARY)
    rs = mb.add_vars(n * m, 0.0, 1.0, obj=A.reshape(-1)).reshape(n, m)
    ss = mb.add_vars(m, 0.0, math.inf)
    flat_r = rs.reshape(-1)
    flat_B = B.reshape(-1)
    for bp in range(m):
        mb.add_row(np.r_[ss[bp], xs, flat_r], np.r_[1.0, B[:, bp], -flat_B], "==", 0.0)
    for b in range(m):
        mb.add_row(np.r_[ys[b], rs[:, b]], np.r_[1.0, -np.ones(n)], "==", 0.0)
    mb.add_row(xs, 1.0, "==", 1.0)
    mb.add_row(ys, 1.0, "==", 1.0)
    for a in range(n):
        mb.add_row([zs[a], xs[a]], [1.0, -1.0], ">=", 0.0)
    mb.add_row(zs, 1.0, "<=", k)
    for a in range(n):
        for b in range(m):
            mb.add_row([rs[a, b], xs[a]], [1.0, -1.0], "<=", 0.0)
    for b in range(m):
        mb.add_row([ss[b], ys[b]], [1.0, M], "<=", M)
    return mb.build()


def solve_stackelberg_single(game: Game, k: int, config: MipConfig | None = None) -> CommitmentResult:
    start = time.perf_counter()
    n, m = game.shape
    out = mip_solve(build_stackelberg_single_milp(game, k), config or DEFAULT_CONFIG)
    if not out.has_solution:
        return CommitmentResult(MixedStrategy.uniform(n), math.nan, _status_name(out),
                                stats=_stats(out), wall_time=time.perf_counter() - start, k=k)
    y = out.incumbent[2 * n: 2 * n + m]
    b = int(np.argmax(y))
    return _result_from_x(game, out.incumbent[:n], k, _status_name(out), _stats(out), start, follower=b)


def build_k_uniform_milp(game: Game, k: int) -> MilpModel:
    """Integer counts ``c(a) in {0..k}`` with ``sum c = k``; x = c / k."""
    _require_zero_sum(game)
    if k < 1:
        raise ValueError("k must be >= 1")
    n = game.n
    mb = ModelBuilder()
    cs = mb.add_vars(n, 0.0, float(k), kind=INTEGER)
    g = mb.add_var(-math.inf, math.inf, obj=1.0)
    mb.add_row(cs, 1.0, "==", k)
    for b in range(game.m):
        mb.add_row(np.r_[g, cs], np.r_[1.0, -game.a[:, b] / k], "<=", 0.0)
    return mb.build()


def solve_k_uniform(game: Game, k: int, config: MipConfig | None = None) -> CommitmentResult:
    """Best strategy on the grid of multiples of 1/k (actions may repeat)."""
    start = time.perf_counter()
    n = game.n
    out = mip_solve(build_k_uniform_milp(game, k), config or DEFAULT_CONFIG)
    if not out.has_solution:
        return CommitmentResult(MixedStrategy.uniform(n), math.nan, _status_name(out),
                                stats=_stats(out), wall_time=time.perf_counter() - start, k=k)
    counts = np.round(out.incumbent[:n])
    strategy = MixedStrategy(counts / k)
    value = float((strategy.probs @ game.a).min())
    return CommitmentResult(strategy, value, _status_name(out), None, _stats(out),
                            time.perf_counter() - start, k)


def stackelberg_pure_value(game: Game) -> tuple[int, int, float]:
    """Best pure commitment under leader-favoring follower ties."""
    best = None
    for a in range(game.n):
        row = game.b[a]
        brs = np.flatnonzero(row == row.max())
        b = int(brs[np.argmax(game.a[a, brs])])
        v = float(game.a[a, b])
        if best is None or v > best[2]:
            best = (a, b, v)
    return best


def equilibrium_value(game: Game) -> float:
    """NE value for zero-sum games, SSE leader value otherwise."""
    if game.zero_sum:
        return nash_zero_sum(game).value1
    return sse_unconstrained(game).value
