"""Bimatrix games, mixed strategies and unconstrained equilibrium baselines."""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .lp import LpModel, LpStatus, lp_solve

SUPPORT_TOL = 1e-9
SUM_TOL = 1e-9


@dataclass(frozen=True)
class Game:
    """Two-player normal-form game; ``a`` pays Player 1, ``b`` pays Player 2."""

    a: np.ndarray
    b: np.ndarray
    zero_sum: bool = False

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        b = np.array(self.b, dtype=float)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError(f"payoff matrix must be n x m with n, m >= 1, got shape {a.shape}")
        if a.shape != b.shape:
            raise ValueError(f"payoff matrices differ in shape: {a.shape} vs {b.shape}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("payoffs must be finite")
        if self.zero_sum and not np.array_equal(b, -a):
            raise ValueError("zero-sum game requires b == -a exactly")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def from_zero_sum(cls, a) -> "Game":
        a = np.array(a, dtype=float)
        return cls(a, -a, zero_sum=True)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def m(self) -> int:
        return self.a.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.a.shape

    def restrict(self, rows=None, cols=None) -> "Game":
        rows = np.arange(self.n) if rows is None else np.asarray(rows, dtype=int)
        cols = np.arange(self.m) if cols is None else np.asarray(cols, dtype=int)
        return Game(self.a[np.ix_(rows, cols)], self.b[np.ix_(rows, cols)], self.zero_sum)

    def to_dict(self) -> dict:
        doc = {"n": self.n, "m": self.m, "zero_sum": self.zero_sum, "A": self.a.tolist()}
        if not self.zero_sum:
            doc["B"] = self.b.tolist()
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "Game":
        a = np.array(doc["A"], dtype=float)
        if a.shape != (doc["n"], doc["m"]):
            raise ValueError(f"declared size {doc['n']}x{doc['m']} does not match A of shape {a.shape}")
        if doc.get("zero_sum", False):
            return cls.from_zero_sum(a)
        if "B" not in doc:
            raise ValueError("general-sum game file needs a 'B' matrix")
        return cls(a, np.array(doc["B"], dtype=float), False)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "Game":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class MixedStrategy:
    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).reshape(-1)
        if p.size == 0:
            raise ValueError("strategy must have at least one action")
        if np.any(p < -SUM_TOL) or np.any(p > 1 + SUM_TOL):
            raise ValueError("probabilities must lie in [0, 1]")
        if abs(p.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def pure(cls, index: int, size: int) -> "MixedStrategy":
        p = np.zeros(size)
        p[index] = 1.0
        return cls(p)

    @classmethod
    def uniform(cls, size: int, over=None) -> "MixedStrategy":
        p = np.zeros(size)
        idx = np.arange(size) if over is None else np.asarray(list(over), dtype=int)
        p[idx] = 1.0 / idx.size
        return cls(p)

    @classmethod
    def from_weights(cls, weights) -> "MixedStrategy":
        """Zero out entries below the support threshold and renormalize."""
        w = np.array(weights, dtype=float).reshape(-1)
        w[w < SUPPORT_TOL] = 0.0
        total = w.sum()
        if total <= 0:
            raise ValueError("weights have no positive mass")
        return cls(w / total)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.probs > SUPPORT_TOL))

    def __len__(self) -> int:
        return self.probs.size


@dataclass(frozen=True)
class EquilibriumProfile:
    x: MixedStrategy
    y: MixedStrategy
    value1: float
    value2: float


@dataclass
class SolveStats:
    nodes: int = 0
    lp_solves: int = 0
    best_bound: float = math.nan


@dataclass
class CommitmentResult:
    """Player 1's commitment together with the payoff it secures."""

    strategy: MixedStrategy
    value: float
    status: str = "Optimal"
    follower_action: int | None = None
    stats: SolveStats = field(default_factory=SolveStats)
    wall_time: float = 0.0
    k: int | None = None
    # For implicit action spaces: labels of the strategy's entries, and the
    # opponent actions that were generated along the way.
    actions: list | None = None
    columns: list | None = None

    @property
    def support(self) -> tuple[int, ...]:
        return self.strategy.support

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy.probs.tolist(),
            "support": list(self.support),
            "value": self.value,
            "status": self.status,
            "follower_action": self.follower_action,
            "k": self.k,
            "nodes": self.stats.nodes,
            "lp_solves": self.stats.lp_solves,
            "best_bound": self.stats.best_bound,
            "wall_time": self.wall_time,
        }


def _probs(s, size: int, who: str) -> np.ndarray:
    p = s.probs if isinstance(s, MixedStrategy) else np.asarray(s, dtype=float).reshape(-1)
    if p.size != size:
        raise ValueError(f"{who} strategy has length {p.size}, expected {size}")
    return p


def expected_utility(game: Game, x, y) -> tuple[float, float]:
    """Return ``(x^T A y, x^T B y)``."""
    px = _probs(x, game.n, "Player 1")
    py = _probs(y, game.m, "Player 2")
    return float(px @ game.a @ py), float(px @ game.b @ py)


def best_response(game: Game, responder: int, opponent) -> tuple[int, float]:
    """Best pure reply of ``responder`` (1 or 2) under its own payoff matrix.

    Exact ties go to the lowest index.
    """
    if responder == 1:
        payoffs = game.a @ _probs(opponent, game.m, "Player 2")
    elif responder == 2:
        payoffs = _probs(opponent, game.n, "Player 1") @ game.b
    else:
        raise ValueError("responder must be 1 or 2")
    i = int(np.argmax(payoffs))
    return i, float(payoffs[i])


def maximin_model(a: np.ndarray) -> LpModel:
    """LP over ``(x_1..x_n, g)``: max g s.t. g <= sum_a A(a,b) x(a) for all b, x in the simplex."""
    n, m = a.shape
    c = np.zeros(n + 1)
    c[n] = 1.0
    rows = np.zeros((m + 1, n + 1))
    rows[:m, :n] = -a.T
    rows[:m, n] = 1.0
    rows[m, :n] = 1.0
    senses = ("<=",) * m + ("==",)
    rhs = np.zeros(m + 1)
    rhs[m] = 1.0
    lower = np.r_[np.zeros(n), -np.inf]
    upper = np.r_[np.ones(n), np.inf]
    return LpModel(c, rows, senses, rhs, lower, upper)


def nash_zero_sum(game: Game) -> EquilibriumProfile:
    """Saddle point of a zero-sum game from the maximin LP and its duals."""
    if not game.zero_sum:
        raise ValueError("nash_zero_sum needs a zero-sum game")
    out = lp_solve(maximin_model(game.a))
    if out.status is not LpStatus.OPTIMAL:
        raise RuntimeError(f"maximin LP returned {out.status.value}")
    x = MixedStrategy.from_weights(out.solution[: game.n])
    y = MixedStrategy.from_weights(np.maximum(out.duals[: game.m], 0.0))
    v = out.objective_value
    return EquilibriumProfile(x, y, v, -v)


def pure_maximin(a: np.ndarray) -> tuple[int, float]:
    worst = a.min(axis=1)
    i = int(np.argmax(worst))
    return i, float(worst[i])


def follower_best_response_sets(game: Game, x: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    u2 = x @ game.b
    return np.flatnonzero(u2 >= u2.max() - tol * (1 + abs(u2.max())))


def _stackelberg_lp(game: Game, b: int, rows=None) -> LpModel:
    """Maximize Player 1's payoff vs column ``b`` subject to ``b`` being a follower best response."""
    n, m = game.shape
    c = np.r_[game.a[:, b]]
    diff = (game.b - game.b[:, [b]]).T  # row b': B(a,b') - B(a,b)
    others = [bp for bp in range(m) if bp != b]
    A = np.vstack([diff[others], np.ones((1, n))])
    senses = ("<=",) * len(others) + ("==",)
    rhs = np.r_[np.zeros(len(others)), 1.0]
    upper = np.ones(n)
    if rows is not None:
        upper = np.zeros(n)
        upper[list(rows)] = 1.0
    return LpModel(c, A, senses, rhs, np.zeros(n), upper)


def sse_unconstrained(game: Game) -> CommitmentResult:
    """Strong Stackelberg commitment by one LP per follower action.

    The best feasible LP wins; equal values go to the lowest follower index.
    """
    start = time.perf_counter()
    best = None
    lp_count = 0
    for b in range(game.m):
        out = lp_solve(_stackelberg_lp(game, b))
        lp_count += 1
        if out.status is not LpStatus.OPTIMAL:
            continue
        if best is None or out.objective_value > best[0] + 1e-9 * (1 + abs(best[0])):
            best = (out.objective_value, b, out.solution)
    if best is None:  # pragma: no cover - one LP is always feasible
        raise RuntimeError("no follower action is inducible")
    value, b, sol = best
    x = MixedStrategy.from_weights(sol)
    return CommitmentResult(x, float(x.probs @ game.a[:, b]), "Optimal", b,
                            SolveStats(0, lp_count, value), time.perf_counter() - start, game.n)
