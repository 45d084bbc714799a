"""Incremental strategy generation for large action spaces.

* :func:`single_oracle_solve` grows Player 2's column set with best responses
  while re-solving the k-sparse MILP on the restricted matrix.
* :func:`build_large_n_milp` handles a Player 1 action space given implicitly
  as binary points of ``{z : F z = rhs}`` by mixing ``k`` copies of it.
* :func:`combined_solve` wraps the large-n MILP in the single-oracle loop.
* :func:`double_oracle_solve` is the classic two-sided baseline.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field
from typing import Any, Hashable, Protocol, Sequence

import numpy as np

from .game import CommitmentResult, EquilibriumProfile, Game, MixedStrategy, SolveStats, nash_zero_sum
from .mip import BINARY, MilpModel, MipConfig, MipStatus, ModelBuilder, mip_solve
from .sparse import DEFAULT_CONFIG, solve_k_sparse_zero_sum


@dataclass(frozen=True)
class OracleConfig:
    epsilon: float = 1e-3
    max_iterations: int = 1000
    initial_columns: tuple | None = None
    initial_rows: tuple | None = None
    mip: MipConfig = DEFAULT_CONFIG

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.initial_columns is not None and len(self.initial_columns) == 0:
            raise ValueError("initial column set must be nonempty")
        if self.initial_rows is not None and len(self.initial_rows) == 0:
            raise ValueError("initial row set must be nonempty")


@dataclass
class OracleIteration:
    iteration: int
    restricted_value: float
    br_value: float
    gap: float
    column: Any
    wall_ms: float


@dataclass
class OracleTrace:
    records: list[OracleIteration] = field(default_factory=list)
    status: str = "Incomplete"

    def __len__(self):
        return len(self.records)

    @property
    def final_gap(self) -> float:
        return self.records[-1].gap if self.records else math.inf

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "g", "br_value", "gap", "wall_ms"])
        for r in self.records:
            w.writerow([r.iteration, repr(r.restricted_value), repr(r.br_value), repr(r.gap), f"{r.wall_ms:.3f}"])
        return buf.getvalue()


class ColumnOracle(Protocol):
    """What the single-oracle loop needs from Player 2's side."""

    n_rows: int

    def column(self, key: Hashable) -> np.ndarray: ...

    def best_column(self, x: np.ndarray) -> tuple[Hashable, float]: ...

    def initial_column(self) -> Hashable: ...


class MatrixOracle:
    """Exact best responses for an explicit zero-sum game.

    Values are always Player 1's payoff; Player 2 minimizes it. Ties go to
    the lowest index.
    """

    def __init__(self, game: Game):
        if not game.zero_sum:
            raise ValueError("oracle methods are for zero-sum games")
        self.game = game
        self.n_rows = game.n

    def payoff(self, a, b) -> float:
        return float(self.game.a[a, b])

    def column(self, b) -> np.ndarray:
        return self.game.a[:, b]

    def best_column(self, x: np.ndarray, rows: Sequence[int] | None = None) -> tuple[int, float]:
        a = self.game.a if rows is None else self.game.a[list(rows)]
        v = np.asarray(x) @ a
        b = int(np.argmin(v))
        return b, float(v[b])

    def best_row(self, y: np.ndarray, cols: Sequence[int] | None = None) -> tuple[int, float]:
        a = self.game.a if cols is None else self.game.a[:, list(cols)]
        v = a @ np.asarray(y)
        i = int(np.argmax(v))
        return i, float(v[i])

    def initial_column(self) -> int:
        return int(np.argmin(self.game.a.max(axis=0)))

    def initial_row(self) -> int:
        return int(np.argmax(self.game.a.min(axis=1)))


def single_oracle_solve(oracle: ColumnOracle, k: int, config: OracleConfig | None = None
                        ) -> tuple[CommitmentResult, OracleTrace]:
    """k-sparse commitment against a column player reached only through ``oracle``.

    Every iteration's gap is measured with a fresh full best response, so a
    converged result is certified epsilon-optimal.
    """
    config = config or OracleConfig()
    start = time.perf_counter()
    cols: list = list(config.initial_columns) if config.initial_columns is not None else [oracle.initial_column()]
    seen = set(cols)
    matrix = np.column_stack([oracle.column(c) for c in cols])
    trace = OracleTrace()
    nodes = lps = 0
    x = None
    result_value = math.nan
    for it in range(1, config.max_iterations + 1):
        t0 = time.perf_counter()
        sub = solve_k_sparse_zero_sum(Game.from_zero_sum(matrix), k, config.mip)
        nodes += sub.stats.nodes
        lps += sub.stats.lp_solves
        x = sub.strategy.probs
        g = float((x @ matrix).min())
        col, u = oracle.best_column(x)
        gap = g - u
        trace.records.append(OracleIteration(it, g, u, gap, col, (time.perf_counter() - t0) * 1e3))
        result_value = u
        if gap < config.epsilon:
            trace.status = "Converged"
            break
        if col in seen:  # stalled: the master solve is not tight enough to make progress
            break
        cols.append(col)
        seen.add(col)
        matrix = np.column_stack([matrix, oracle.column(col)])
    status = "Optimal" if trace.status == "Converged" else "Incomplete"
    strategy = MixedStrategy.from_weights(x)
    res = CommitmentResult(strategy, result_value, status, None, SolveStats(nodes, lps, trace.records[-1].restricted_value),
                           time.perf_counter() - start, k, columns=cols)
    return res, trace


def double_oracle_solve(row_oracle, column_oracle, config: OracleConfig | None = None) -> EquilibriumProfile:
    """Epsilon-Nash equilibrium by growing both players' restricted sets.

    Oracles follow :class:`MatrixOracle`: ``best_row(y, cols)`` and
    ``best_column(x, rows)`` return an index and Player 1's payoff, and
    ``payoff(a, b)`` gives single entries.
    """
    config = config or OracleConfig()
    rows = list(config.initial_rows) if config.initial_rows is not None else [row_oracle.initial_row()]
    cols = list(config.initial_columns) if config.initial_columns is not None else [column_oracle.initial_column()]
    n, m = row_oracle.n_rows, column_oracle.game.m
    x_full = y_full = None
    value = math.nan
    for _ in range(config.max_iterations):
        sub = np.array([[column_oracle.payoff(a, b) for b in cols] for a in rows])
        ne = nash_zero_sum(Game.from_zero_sum(sub))
        x_full = np.zeros(n)
        x_full[rows] = ne.x.probs
        y_full = np.zeros(m)
        y_full[cols] = ne.y.probs
        a_br, upper = row_oracle.best_row(y_full)
        b_br, lower = column_oracle.best_column(x_full)
        value = ne.value1
        if upper - lower < config.epsilon:
            break
        if a_br not in rows:
            rows.append(a_br)
        if b_br not in cols:
            cols.append(b_br)
    x = MixedStrategy(x_full)
    y = MixedStrategy(y_full)
    v1 = float(x.probs @ column_oracle.game.a @ y.probs)
    return EquilibriumProfile(x, y, v1, -v1)


@dataclass(frozen=True)
class MilpRepresentableSpace:
    """Player 1 actions ``{z in {0,1}^l : F z = flow_rhs}`` and their payoffs.

    Against opponent action ``b`` with data ``(C_b, d_b)`` a pure action ``z``
    earns ``min(C_b @ z + d_b)``.
    """

    l: int
    F: np.ndarray
    flow_rhs: np.ndarray
    opponent_actions: tuple[tuple[np.ndarray, np.ndarray], ...]
    check_nonempty: bool = True

    def __post_init__(self):
        F = np.asarray(self.F, dtype=float).reshape(-1, self.l)
        rhs = np.asarray(self.flow_rhs, dtype=float).reshape(-1)
        if rhs.size != F.shape[0]:
            raise ValueError("flow_rhs needs one entry per row of F")
        ops = []
        for C, d in self.opponent_actions:
            C = np.asarray(C, dtype=float).reshape(-1, self.l)
            d = np.asarray(d, dtype=float).reshape(-1)
            if C.shape[0] != d.size:
                raise ValueError("each C_b needs as many rows as d_b")
            if not (np.all(np.isfinite(C)) and np.all(np.isfinite(d))):
                raise ValueError("payoff data must be finite")
            ops.append((C, d))
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "flow_rhs", rhs)
        object.__setattr__(self, "opponent_actions", tuple(ops))
        if self.check_nonempty and self.l > 0:
            mb = ModelBuilder()
            zs = mb.add_vars(self.l, 0.0, 1.0, kind=BINARY)
            for i in range(F.shape[0]):
                mb.add_row(zs, F[i], "==", rhs[i])
            out = mip_solve(mb.build(), MipConfig(node_limit=10_000))
            if out.status is MipStatus.INFEASIBLE:
                raise ValueError("action space {z binary : F z = rhs} is empty")
        elif self.l == 0:
            raise ValueError("action space is empty")

    @property
    def m(self) -> int:
        return len(self.opponent_actions)

    def payoff(self, z: np.ndarray, b: int) -> float:
        C, d = self.opponent_actions[b]
        return float(np.min(C @ z + d))

    def with_opponents(self, opponent_actions) -> "MilpRepresentableSpace":
        return MilpRepresentableSpace(self.l, self.F, self.flow_rhs, tuple(opponent_actions), check_nonempty=False)


@dataclass
class LargeNLayout:
    """Variable indices of the large-n MILP, copy-major."""

    k: int
    l: int
    m: int
    z: np.ndarray  # (k, l)
    x: np.ndarray  # (k, l)
    t: np.ndarray  # (k,)
    c: np.ndarray  # (k, m)
    g: int


def build_large_n_milp(space: MilpRepresentableSpace, k: int, symmetry_breaking: bool = True
                       ) -> tuple[MilpModel, LargeNLayout]:
    """k-sparse mixture over an implicit action set as one MILP.

    Copy ``i`` picks a pure action ``z_i`` and a weight ``t_i``; ``x_i``
    linearizes ``t_i * z_i``. Payoff rows scale by ``t_i`` so that
    ``c(i, b) <= t_i * min(C_b z_i + d_b)``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    l, m = space.l, space.m
    mb = ModelBuilder()
    z = np.array([mb.add_vars(l, 0.0, 1.0, kind=BINARY) for _ in range(k)])
    x = np.array([mb.add_vars(l, 0.0, 1.0) for _ in range(k)])
    t = mb.add_vars(k, 0.0, 1.0)
    c = np.array([mb.add_vars(m, -math.inf, math.inf) for _ in range(k)]).reshape(k, m)
    g = mb.add_var(-math.inf, math.inf, obj=1.0)
    F, rhs = space.F, space.flow_rhs
    for i in range(k):
        for r in range(F.shape[0]):
            nz = np.flatnonzero(F[r])
            mb.add_row(z[i, nz], F[r, nz], "==", rhs[r])
        for e in range(l):
            mb.add_row([x[i, e], t[i], z[i, e]], [1.0, -1.0, -1.0], ">=", -1.0)
            mb.add_row([x[i, e], t[i]], [1.0, -1.0], "<=", 0.0)
            mb.add_row([x[i, e], z[i, e]], [1.0, -1.0], "<=", 0.0)
    mb.add_row(t, 1.0, "==", 1.0)
    for b, (C, d) in enumerate(space.opponent_actions):
        for i in range(k):
            for r in range(C.shape[0]):
                nz = np.flatnonzero(C[r])
                mb.add_row(np.r_[x[i, nz], t[i], c[i, b]], np.r_[C[r, nz], d[r], -1.0], ">=", 0.0)
        mb.add_row(np.r_[g, c[:, b]], np.r_[1.0, -np.ones(k)], "<=", 0.0)
    if symmetry_breaking:
        for i in range(k - 1):
            mb.add_row([t[i], t[i + 1]], [1.0, -1.0], ">=", 0.0)
    layout = LargeNLayout(k, l, m, z, x, t, c, g)
    return mb.build(), layout


def decode_large_n(solution: np.ndarray, layout: LargeNLayout) -> list[tuple[np.ndarray, float]]:
    """Copies with positive weight as ``(z, t)`` pairs; identical z's are merged."""
    out: list[tuple[np.ndarray, float]] = []
    for i in range(layout.k):
        w = float(solution[layout.t[i]])
        if w <= 1e-9:
            continue
        zi = np.round(solution[layout.z[i]])
        for j, (zj, wj) in enumerate(out):
            if np.array_equal(zj, zi):
                out[j] = (zj, wj + w)
                break
        else:
            out.append((zi, w))
    total = sum(w for _, w in out)
    return [(zi, w / total) for zi, w in out]


def solve_large_n(space: MilpRepresentableSpace, k: int, mip_config: MipConfig | None = None):
    """Solve the large-n MILP; returns ``(mixture, value, MipOutcome)``."""
    model, layout = build_large_n_milp(space, k)
    out = mip_solve(model, mip_config or DEFAULT_CONFIG)
    if not out.has_solution:
        return [], math.nan, out
    mixture = decode_large_n(out.incumbent, layout)
    value = min(sum(w * space.payoff(zi, b) for zi, w in mixture) for b in range(space.m))
    return mixture, value, out


class ImplicitGame(Protocol):
    """A zero-sum game whose Player 1 side is a MILP-representable space."""

    def leader_space(self, columns: Sequence) -> MilpRepresentableSpace: ...

    def decode_leader(self, z: np.ndarray) -> Hashable: ...

    def evader_best_response(self, mixture: Sequence[tuple[Hashable, float]]) -> tuple[Hashable, float]: ...

    def initial_evader_action(self) -> Hashable: ...


def combined_solve(game: ImplicitGame, k: int, config: OracleConfig | None = None
                   ) -> tuple[CommitmentResult, OracleTrace]:
    """Single-oracle loop whose master problem is the large-n MILP.

    ``evader_best_response`` returns Player 2's best action and Player 2's
    payoff; Player 1's value is its negation.
    """
    config = config or OracleConfig()
    start = time.perf_counter()
    cols = list(config.initial_columns) if config.initial_columns is not None else [game.initial_evader_action()]
    seen = set(cols)
    trace = OracleTrace()
    nodes = lps = 0
    mixture: list = []
    value = math.nan
    for it in range(1, config.max_iterations + 1):
        t0 = time.perf_counter()
        space = game.leader_space(cols)
        zmix, g, out = solve_large_n(space, k, config.mip)
        nodes += out.nodes_explored
        lps += out.lp_solves
        if not zmix:
            trace.status = "Failed"
            break
        mixture = [(game.decode_leader(zi), w) for zi, w in zmix]
        col, evader_value = game.evader_best_response(mixture)
        u = -evader_value
        gap = g - u
        trace.records.append(OracleIteration(it, g, u, gap, col, (time.perf_counter() - t0) * 1e3))
        value = u
        if gap < config.epsilon:
            trace.status = "Converged"
            break
        if col in seen:  # stalled: the master solve is not tight enough to make progress
            break
        cols.append(col)
        seen.add(col)
    status = "Optimal" if trace.status == "Converged" else "Incomplete"
    actions = [a for a, _ in mixture]
    probs = np.array([w for _, w in mixture]) if mixture else np.array([1.0])
    res = CommitmentResult(MixedStrategy(probs / probs.sum()), value, status, None,
                           SolveStats(nodes, lps, trace.records[-1].restricted_value if trace.records else math.nan),
                           time.perf_counter() - start, k, actions=actions, columns=cols)
    return res, trace


def explicit_space(game: Game, columns: Sequence[int] | None = None) -> MilpRepresentableSpace:
    """A matrix game as a MILP-representable space: ``z`` is a one-hot row choice."""
    cols = range(game.m) if columns is None else columns
    return MilpRepresentableSpace(game.n, np.ones((1, game.n)), np.ones(1),
                                  tuple((game.a[:, b][None, :], np.zeros(1)) for b in cols),
                                  check_nonempty=False)


class MatrixImplicitGame:
    """Adapter giving an explicit zero-sum game the :class:`ImplicitGame` interface."""

    def __init__(self, game: Game):
        self.oracle = MatrixOracle(game)
        self.game = game

    def leader_space(self, columns):
        return explicit_space(self.game, columns)

    def decode_leader(self, z):
        return int(np.flatnonzero(np.asarray(z) > 0.5)[0])

    def evader_best_response(self, mixture):
        x = np.zeros(self.game.n)
        for a, w in mixture:
            x[a] += w
        b, u = self.oracle.best_column(x)
        return b, -u

    def initial_evader_action(self):
        return self.oracle.initial_column()
