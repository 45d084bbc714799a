"""Patrolling (pursuit-evasion) games on grid graphs.

A physical ``width x height`` grid is time-expanded over ``depth`` steps; a
path is a sequence of ``depth + 1`` vertices joined by grid edges. Modes:

``leader-paths-vs-evader-paths``
    both walk; the evader is caught when both traverse the same physical
    edge (either direction) at the same step.
``leader-paths-vs-exit-choice``
    the evader names an exit vertex and is caught if the leader's path
    visits it at any time.
``checkpoint-vs-evader-paths``
    the leader guards one vertex for the whole horizon; the evader is caught
    if its path passes through it.
``leader-paths-vs-edge-set``
    interdiction: the opponent attacks ``w`` physical edges and the leader
    scores ``min(1, #attacked edges on its path)``.

Escaping evaders earn the reward of their final vertex (their exit in the
exit-choice mode); caught evaders earn 0. The leader's payoff is the negation.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Hashable, Sequence

import numpy as np

from .game import Game
from .oracle import MilpRepresentableSpace
from .sparse import ConstraintSet, ConstraintSetSpec

PATHS_VS_PATHS = "leader-paths-vs-evader-paths"
PATHS_VS_EXIT = "leader-paths-vs-exit-choice"
CHECKPOINT_VS_PATHS = "checkpoint-vs-evader-paths"
PATHS_VS_EDGES = "leader-paths-vs-edge-set"
MODES = (PATHS_VS_PATHS, PATHS_VS_EXIT, CHECKPOINT_VS_PATHS, PATHS_VS_EDGES)

EXPLICIT_LIMIT = 100_000


@dataclass(frozen=True)
class PathGameSpec:
    width: int
    height: int
    depth: int
    leader_starts: tuple[int, ...] = ()
    evader_starts: tuple[int, ...] = ()
    desirable_exits: tuple[int, ...] = ()
    desirable_range: tuple[float, float] = (6.0, 10.0)
    other_range: tuple[float, float] = (1.0, 5.0)
    mode: str = PATHS_VS_PATHS
    seed: int = 0
    attacked_edges: int = 1
    allow_wait: bool = False

    def __post_init__(self):
        for name in ("leader_starts", "evader_starts", "desirable_exits", "desirable_range", "other_range"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.width < 1 or self.height < 1:
            raise ValueError("grid needs positive width and height")
        if self.depth < 1:
            raise ValueError("depth T must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        nv = self.width * self.height
        for name in ("leader_starts", "evader_starts", "desirable_exits"):
            bad = [v for v in getattr(self, name) if not 0 <= v < nv]
            if bad:
                raise ValueError(f"{name} has vertices outside the grid: {bad}")
        if self.mode != CHECKPOINT_VS_PATHS and not self.leader_starts:
            raise ValueError("leader start set must be nonempty")
        if self.mode in (PATHS_VS_PATHS, CHECKPOINT_VS_PATHS) and not self.evader_starts:
            raise ValueError("evader start set must be nonempty")
        for lo, hi in (self.desirable_range, self.other_range):
            if not 0 < lo <= hi:
                raise ValueError("reward ranges must satisfy 0 < lo <= hi")
        if self.mode == PATHS_VS_EDGES and self.attacked_edges < 1:
            raise ValueError("attacked_edges must be >= 1")

    @property
    def num_vertices(self) -> int:
        return self.width * self.height

    def replace(self, **changes) -> "PathGameSpec":
        doc = self.to_dict()
        doc.update(changes)
        return PathGameSpec.from_dict(doc)

    def to_dict(self) -> dict:
        doc = asdict(self)
        for key in ("leader_starts", "evader_starts", "desirable_exits", "desirable_range", "other_range"):
            doc[key] = list(doc[key])
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "PathGameSpec":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(doc) - known
        if extra:
            raise ValueError(f"unknown scenario fields: {sorted(extra)}")
        return cls(**doc)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def load(cls, path) -> "PathGameSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))


# Campus scenarios, with vertex ids reused on a 7 x 6 grid (ids 0..41).
_CAMPUS = dict(width=7, height=6, depth=5)
SCENARIOS: dict[str, dict] = {
    "vanilla": dict(_CAMPUS, mode=PATHS_VS_EXIT, leader_starts=(7, 9, 14, 19, 29, 35, 36, 39),
                    desirable_exits=(13, 30, 32, 37, 40)),
    "structured": dict(_CAMPUS, mode=PATHS_VS_EXIT, leader_starts=(7, 9, 14, 19, 29, 35, 36, 39),
                       desirable_exits=(13, 30, 32, 37, 40)),
    "large-leader-0": dict(_CAMPUS, mode=PATHS_VS_EXIT, leader_starts=(2, 4, 10, 24, 33),
                           desirable_exits=(9, 13, 37, 35)),
    "large-leader-1": dict(_CAMPUS, mode=PATHS_VS_EXIT, leader_starts=(7, 9, 14, 19, 29, 35, 36, 39),
                           desirable_exits=(13, 30, 32, 37, 40)),
    "large-evader": dict(_CAMPUS, mode=CHECKPOINT_VS_PATHS, evader_starts=(4, 9, 12, 26, 35, 40),
                         desirable_exits=(11, 13, 21, 25, 29, 35)),
    "large-both-0": dict(_CAMPUS, mode=PATHS_VS_PATHS, leader_starts=(12, 16, 19, 21, 27, 32),
                         evader_starts=(12, 16, 19, 21, 27, 32), desirable_exits=(9, 27, 29, 33, 37)),
    "large-both-1": dict(_CAMPUS, mode=PATHS_VS_PATHS, leader_starts=(4, 8, 13, 16, 22, 24),
                         evader_starts=(4, 8, 13, 16, 22, 24), desirable_exits=(0, 3, 8, 14, 35)),
    "large-both-2": dict(_CAMPUS, mode=PATHS_VS_PATHS, leader_starts=(3, 5, 8, 21, 27, 39),
                         evader_starts=(3, 5, 8, 21, 27, 39), desirable_exits=(15, 20, 21, 35, 40)),
}


def scenario(name: str, **overrides) -> PathGameSpec:
    if name not in SCENARIOS:
        raise KeyError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}")
    return PathGameSpec(**{**SCENARIOS[name], **overrides})


def _edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u <= v else (v, u)


class PathGame:
    """A generated patrolling game; exposes both explicit and implicit views."""

    def __init__(self, spec: PathGameSpec):
        self.spec = spec
        W, H = spec.width, spec.height
        nv = W * H
        self.nbrs: list[tuple[int, ...]] = []
        for v in range(nv):
            r, c = divmod(v, W)
            out = []
            if r > 0:
                out.append(v - W)
            if c > 0:
                out.append(v - 1)
            if spec.allow_wait:
                out.append(v)
            if c < W - 1:
                out.append(v + 1)
            if r < H - 1:
                out.append(v + W)
            self.nbrs.append(tuple(out))
        self.physical_edges = sorted({_edge_key(u, v) for u in range(nv) for v in self.nbrs[u] if u != v})
        u = np.random.default_rng(spec.seed).uniform(size=nv)
        desirable = np.zeros(nv, dtype=bool)
        desirable[list(spec.desirable_exits)] = True
        lo = np.where(desirable, spec.desirable_range[0], spec.other_range[0])
        hi = np.where(desirable, spec.desirable_range[1], spec.other_range[1])
        self.rewards = lo + u * (hi - lo)
        self._layered: list[tuple[int, int, int]] | None = None

    # ---- action sets ----------------------------------------------------

    @property
    def leader_is_path(self) -> bool:
        return self.spec.mode != CHECKPOINT_VS_PATHS

    def _paths_from(self, starts: Sequence[int], limit: float = math.inf) -> list[tuple[int, ...]]:
        T = self.spec.depth
        out: list[tuple[int, ...]] = []
        stack = [(s,) for s in sorted(set(starts), reverse=True)]
        while stack:
            p = stack.pop()
            if len(p) == T + 1:
                out.append(p)
                if len(out) > limit:
                    raise ValueError(f"more than {int(limit)} paths; use the implicit form")
                continue
            stack.extend(p + (w,) for w in reversed(self.nbrs[p[-1]]))
        return out

    def count_paths(self, starts: Sequence[int]) -> int:
        counts = {s: 1 for s in set(starts)}
        for _ in range(self.spec.depth):
            nxt: dict[int, int] = {}
            for v, c in counts.items():
                for w in self.nbrs[v]:
                    nxt[w] = nxt.get(w, 0) + c
            counts = nxt
        return sum(counts.values())

    def leader_actions(self, limit: float = EXPLICIT_LIMIT) -> list:
        if self.leader_is_path:
            return self._paths_from(self.spec.leader_starts, limit)
        return list(range(self.spec.num_vertices))

    def evader_actions(self, limit: float = EXPLICIT_LIMIT) -> list:
        mode = self.spec.mode
        if mode == PATHS_VS_EXIT:
            return list(range(self.spec.num_vertices))
        if mode == PATHS_VS_EDGES:
            n = math.comb(len(self.physical_edges), self.spec.attacked_edges)
            if n > limit:
                raise ValueError(f"more than {int(limit)} edge sets; use the implicit form")
            return list(itertools.combinations(self.physical_edges, self.spec.attacked_edges))
        return self._paths_from(self.spec.evader_starts, limit)

    # ---- payoffs --------------------------------------------------------

    @staticmethod
    def _path_edges(path) -> set:
        return {(t, *_edge_key(path[t], path[t + 1])) for t in range(len(path) - 1)}

    def caught(self, leader, evader) -> bool:
        mode = self.spec.mode
        if leader is None:
            return False
        if mode == PATHS_VS_PATHS:
            return not self._path_edges(leader).isdisjoint(self._path_edges(evader))
        if mode == PATHS_VS_EXIT:
            return evader in leader
        if mode == CHECKPOINT_VS_PATHS:
            return leader in evader
        raise ValueError("capture is not defined in the edge-set mode")

    def leader_payoff(self, leader, evader) -> float:
        if self.spec.mode == PATHS_VS_EDGES:
            if leader is None:
                return 0.0
            mine = {_edge_key(leader[t], leader[t + 1]) for t in range(len(leader) - 1)}
            return float(min(1, len(mine.intersection(evader))))
        if self.caught(leader, evader):
            return 0.0
        exit_vertex = evader if self.spec.mode == PATHS_VS_EXIT else evader[-1]
        return -float(self.rewards[exit_vertex])

    def explicit_game(self, limit: float = EXPLICIT_LIMIT) -> tuple[Game, list, list]:
        rows = self.leader_actions(limit)
        cols = self.evader_actions(limit)
        a = np.array([[self.leader_payoff(r, c) for c in cols] for r in rows])
        return Game.from_zero_sum(a), rows, cols

    # ---- evader best response ------------------------------------------

    def evader_best_response(self, mixture: Sequence[tuple[Hashable, float]]) -> tuple[Hashable, float]:
        """Exact best reply to a weighted list of leader actions.

        Returns the action and the evader's expected payoff. Equal values go
        to the lexicographically smallest action. A ``None`` leader action
        stands for "no patrol" and never catches anyone.
        """
        mode = self.spec.mode
        if mode in (PATHS_VS_PATHS, CHECKPOINT_VS_PATHS):
            return self._path_dp(mixture)
        best = None
        for b in self.evader_actions(limit=math.inf):
            v = -sum(w * self.leader_payoff(a, b) for a, w in mixture)
            if best is None or v > best[1] + 1e-12 * (1 + abs(best[1])):
                best = (b, float(v))
        return best

    def _path_dp(self, mixture):
        T = self.spec.depth
        weights = [float(w) for _, w in mixture]
        edge_kill: dict[tuple[int, int, int], int] = {}
        vertex_kill: dict[int, int] = {}
        for i, (a, _) in enumerate(mixture):
            if a is None:
                continue
            if self.spec.mode == PATHS_VS_PATHS:
                for key in self._path_edges(a):
                    edge_kill[key] = edge_kill.get(key, 0) | (1 << i)
            else:
                vertex_kill[a] = vertex_kill.get(a, 0) | (1 << i)
        full = (1 << len(mixture)) - 1
        mass_cache: dict[int, float] = {}

        def mass(mask: int) -> float:
            if mask not in mass_cache:
                mass_cache[mask] = sum(w for i, w in enumerate(weights) if mask >> i & 1)
            return mass_cache[mask]

        def step(t, v, w, mask):
            return mask & ~edge_kill.get((t, *_edge_key(v, w)), 0) & ~vertex_kill.get(w, 0)

        memo: dict[tuple[int, int, int], float] = {}

        def value(t, v, mask):
            key = (t, v, mask)
            if key in memo:
                return memo[key]
            if t == T or mask == 0:
                out = self.rewards[v] * mass(mask) if t == T else 0.0
            else:
                out = max(value(t + 1, w, step(t, v, w, mask)) for w in self.nbrs[v])
            memo[key] = out
            return out

        def close(x, y):
            return x >= y - 1e-12 * (1 + abs(y))

        starts = sorted(set(self.spec.evader_starts))
        vals = [value(0, s, full & ~vertex_kill.get(s, 0)) for s in starts]
        top = max(vals)
        s = next(s for s, v in zip(starts, vals) if close(v, top))
        path, mask = [s], full & ~vertex_kill.get(s, 0)
        for t in range(T):
            here = value(t, path[-1], mask)
            for w in self.nbrs[path[-1]]:
                m2 = step(t, path[-1], w, mask)
                if close(value(t + 1, w, m2), here):
                    path.append(w)
                    mask = m2
                    break
        return tuple(path), float(top)

    def initial_evader_action(self):
        """Best reply to no patrol at all."""
        return self.evader_best_response([(None, 1.0)])[0]

    # ---- implicit leader space ----------------------------------------

    @property
    def layered_edges(self) -> list[tuple[int, int, int]]:
        """Time-expanded leader edges ``(t, u, v)`` reachable from the leader starts."""
        if self._layered is None:
            edges = []
            layer = sorted(set(self.spec.leader_starts))
            for t in range(self.spec.depth):
                nxt = set()
                for u in layer:
                    for v in self.nbrs[u]:
                        edges.append((t, u, v))
                        nxt.add(v)
                layer = sorted(nxt)
            self._layered = edges
        return self._layered

    def _flow(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.leader_is_path:
            return np.ones((1, self.spec.num_vertices)), np.ones(1)
        edges = self.layered_edges
        idx_in: dict[tuple[int, int], list[int]] = {}
        idx_out: dict[tuple[int, int], list[int]] = {}
        for j, (t, u, v) in enumerate(edges):
            idx_out.setdefault((t, u), []).append(j)
            idx_in.setdefault((t + 1, v), []).append(j)
        rows, rhs = [], []
        src = np.zeros(len(edges))
        src[[j for j, e in enumerate(edges) if e[0] == 0]] = 1.0
        rows.append(src)
        rhs.append(1.0)
        for node in sorted(idx_in):
            if node[0] >= self.spec.depth:
                continue
            r = np.zeros(len(edges))
            r[idx_in[node]] = 1.0
            r[idx_out.get(node, [])] -= 1.0
            rows.append(r)
            rhs.append(0.0)
        return np.array(rows), np.array(rhs)

    def _opponent_rows(self, b) -> tuple[np.ndarray, np.ndarray]:
        mode = self.spec.mode
        if mode == CHECKPOINT_VS_PATHS:
            R = self.rewards[b[-1]]
            hit = np.zeros(self.spec.num_vertices)
            hit[list(set(b))] = 1.0
            return np.vstack([R * hit, np.zeros_like(hit)]), np.array([-R, 0.0])
        edges = self.layered_edges
        if mode == PATHS_VS_EDGES:
            attacked = set(b)
            hit = np.array([1.0 if u != v and _edge_key(u, v) in attacked else 0.0 for _, u, v in edges])
            return np.vstack([hit, np.zeros_like(hit)]), np.array([0.0, 1.0])
        if mode == PATHS_VS_PATHS:
            R = self.rewards[b[-1]]
            ev = self._path_edges(b)
            hit = np.array([1.0 if (t, *_edge_key(u, v)) in ev else 0.0 for t, u, v in edges])
        else:
            R = self.rewards[b]
            hit = np.array([1.0 if b in (u, v) else 0.0 for _, u, v in edges])
        return np.vstack([R * hit, np.zeros_like(hit)]), np.array([-R, 0.0])

    def leader_space(self, columns: Sequence) -> MilpRepresentableSpace:
        F, rhs = self._flow()
        return MilpRepresentableSpace(F.shape[1], F, rhs, tuple(self._opponent_rows(b) for b in columns),
                                      check_nonempty=False)

    def encode_leader(self, action) -> np.ndarray:
        if not self.leader_is_path:
            z = np.zeros(self.spec.num_vertices)
            z[action] = 1.0
            return z
        pos = {e: j for j, e in enumerate(self.layered_edges)}
        z = np.zeros(len(pos))
        for t in range(len(action) - 1):
            z[pos[(t, action[t], action[t + 1])]] = 1.0
        return z

    def decode_leader(self, z: np.ndarray):
        on = np.flatnonzero(np.asarray(z) > 0.5)
        if not self.leader_is_path:
            return int(on[0])
        step = {}
        for j in on:
            t, u, v = self.layered_edges[j]
            step[t] = (u, v)
        path = [step[0][0]]
        for t in range(self.spec.depth):
            path.append(step[t][1])
        return tuple(path)


class PathColumnOracle:
    """Single-oracle adapter: enumerated leader actions, evader replies by DP."""

    def __init__(self, game: PathGame, limit: float = EXPLICIT_LIMIT):
        self.game = game
        self.rows = game.leader_actions(limit)
        self.n_rows = len(self.rows)

    def column(self, b) -> np.ndarray:
        return np.array([self.game.leader_payoff(a, b) for a in self.rows])

    def best_column(self, x: np.ndarray):
        mixture = [(self.rows[i], float(x[i])) for i in np.flatnonzero(np.asarray(x) > 0)]
        b, v = self.game.evader_best_response(mixture)
        return b, -v

    def initial_column(self):
        return self.game.initial_evader_action()


def gen_path_game(spec: PathGameSpec, form: str = "explicit"):
    """``explicit`` gives ``(Game, leader_actions, evader_actions)``; ``implicit`` gives a :class:`PathGame`."""
    game = PathGame(spec)
    if form == "explicit":
        return game.explicit_game()
    if form == "implicit":
        return game
    raise ValueError("form must be 'explicit' or 'implicit'")


def path_best_response(game: PathGame | PathGameSpec, leader_mixture: Sequence[tuple[Hashable, float]]):
    """Evader's exact best response and its expected payoff."""
    if isinstance(game, PathGameSpec):
        game = PathGame(game)
    total = sum(w for _, w in leader_mixture)
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"leader mixture weights sum to {total}, not 1")
    return game.evader_best_response(leader_mixture)


def constraint_sets_from_paths(paths: Sequence[Sequence[int]], by: str, budget: int,
                               budget_end: int | None = None) -> ConstraintSetSpec:
    """Group path indices by start vertex, end vertex, or both (two sets).

    With ``by="both"`` the start groups get ``budget`` and the end groups get
    ``budget_end`` (defaulting to ``budget``).
    """
    def groups(pos):
        g: dict[int, list[int]] = {}
        for i, p in enumerate(paths):
            g.setdefault(p[pos], []).append(i)
        return tuple(tuple(g[v]) for v in sorted(g))

    if by == "start":
        return ConstraintSetSpec((ConstraintSet(groups(0), budget),))
    if by == "end":
        return ConstraintSetSpec((ConstraintSet(groups(-1), budget),))
    if by == "both":
        return ConstraintSetSpec((ConstraintSet(groups(0), budget),
                                  ConstraintSet(groups(-1), budget if budget_end is None else budget_end)))
    raise ValueError("by must be 'start', 'end' or 'both'")
