"""Best-bound branch and bound over :mod:`sparsecommit.lp`."""

from __future__ import annotations

import enum
import heapq
import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .lp import EQ, GE, LE, LpModel, LpStatus, prepare, solve_prepared

CONTINUOUS, BINARY, INTEGER = 0, 1, 2
_KIND_NAMES = {CONTINUOUS: "continuous", BINARY: "binary", INTEGER: "integer"}


class MipStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    NODE_LIMIT = "NodeLimit"
    TIME_LIMIT = "TimeLimit"


@dataclass(frozen=True)
class MilpModel:
    base: LpModel
    integrality: np.ndarray

    def __post_init__(self):
        kinds = np.asarray(self.integrality, dtype=np.int8).reshape(-1)
        if kinds.size != self.base.num_vars:
            raise ValueError("integrality needs one mark per variable")
        if not np.all(np.isin(kinds, (CONTINUOUS, BINARY, INTEGER))):
            raise ValueError("unknown integrality mark")
        binary = kinds == BINARY
        if np.any(self.base.lower[binary] < 0) or np.any(self.base.upper[binary] > 1):
            raise ValueError("binary variables must have bounds within [0, 1]")
        kinds.setflags(write=False)
        object.__setattr__(self, "integrality", kinds)

    @property
    def integer_mask(self) -> np.ndarray:
        return self.integrality != CONTINUOUS

    @property
    def num_vars(self) -> int:
        return self.base.num_vars

    @property
    def num_constraints(self) -> int:
        return self.base.num_constraints

    def count(self, kind: int) -> int:
        return int(np.sum(self.integrality == kind))

    def kind_names(self) -> list[str]:
        return [_KIND_NAMES[int(k)] for k in self.integrality]


@dataclass(frozen=True)
class MipConfig:
    node_limit: int | None = None
    time_limit: float | None = None
    abs_gap: float = 1e-9
    rel_gap: float = 1e-6
    int_tol: float = 1e-6

    def gap_tolerance(self, incumbent_value: float) -> float:
        return max(self.abs_gap, self.rel_gap * abs(incumbent_value))


@dataclass
class MipOutcome:
    status: MipStatus
    incumbent: np.ndarray | None = None
    objective_value: float = -math.inf
    best_bound: float = math.inf
    nodes_explored: int = 0
    lp_solves: int = 0
    bound_history: list[float] = field(default_factory=list, repr=False)

    @property
    def has_solution(self) -> bool:
        return self.incumbent is not None


class ModelBuilder:
    """Incremental construction of a (mixed-integer) linear model.

    Rows are kept sparse while building and densified once in :meth:`build`.
    """

    def __init__(self):
        self._lo: list[float] = []
        self._hi: list[float] = []
        self._obj: list[float] = []
        self._kind: list[int] = []
        self._rows: list[tuple[np.ndarray, np.ndarray, str, float]] = []

    @property
    def num_vars(self) -> int:
        return len(self._obj)

    @property
    def num_rows(self) -> int:
        return len(self._rows)

    def add_vars(self, count: int, lo=0.0, hi=math.inf, obj=0.0, kind: int = CONTINUOUS) -> np.ndarray:
        start = len(self._obj)
        self._lo.extend(np.broadcast_to(np.asarray(lo, dtype=float), (count,)).tolist())
        self._hi.extend(np.broadcast_to(np.asarray(hi, dtype=float), (count,)).tolist())
        self._obj.extend(np.broadcast_to(np.asarray(obj, dtype=float), (count,)).tolist())
        self._kind.extend([kind] * count)
        return np.arange(start, start + count)

    def add_var(self, lo=0.0, hi=math.inf, obj=0.0, kind: int = CONTINUOUS) -> int:
        return int(self.add_vars(1, lo, hi, obj, kind)[0])

    def add_row(self, idx, coef, sense: str, rhs: float) -> None:
        idx = np.asarray(idx, dtype=np.intp).reshape(-1)
        coef = np.broadcast_to(np.asarray(coef, dtype=float), idx.shape).copy()
        self._rows.append((idx, coef, sense, float(rhs)))

    def build(self) -> MilpModel:
        n = len(self._obj)
        A = np.zeros((len(self._rows), n))
        for i, (idx, coef, _, _) in enumerate(self._rows):
            np.add.at(A[i], idx, coef)
        lp = LpModel(np.array(self._obj), A, tuple(r[2] for r in self._rows),
                     np.array([r[3] for r in self._rows]), np.array(self._lo), np.array(self._hi))
        return MilpModel(lp, np.array(self._kind, dtype=np.int8))


def _tighten_bounds(model: MilpModel):
    """Fold single-variable rows into bounds; returns (lp without those rows, lo, hi, feasible)."""
    base = model.base
    lo = base.lower.copy()
    hi = base.upper.copy()
    A = base.A
    nnz = np.count_nonzero(A, axis=1) if A.shape[0] else np.zeros(0, dtype=int)
    keep = []
    for i in range(A.shape[0]):
        if nnz[i] != 1:
            keep.append(i)
            continue
        j = int(np.flatnonzero(A[i])[0])
        a, r, s = A[i, j], base.rhs[i], base.senses[i]
        bound = r / a
        if s == EQ:
            lo[j] = max(lo[j], bound)
            hi[j] = min(hi[j], bound)
        elif (s == LE) == (a > 0):
            hi[j] = min(hi[j], bound)
        else:
            lo[j] = max(lo[j], bound)
    ints = model.integer_mask
    lo[ints] = np.ceil(lo[ints] - 1e-9)
    hi[ints] = np.floor(hi[ints] + 1e-9)
    feasible = bool(np.all(lo <= hi + 1e-9))
    hi = np.maximum(hi, lo) if feasible else hi
    reduced = LpModel(base.objective, A[keep], tuple(base.senses[i] for i in keep), base.rhs[keep],
                      base.lower, base.upper)
    return reduced, lo, hi, feasible


def _most_fractional(values: np.ndarray, int_idx: np.ndarray, tol: float) -> int:
    v = values[int_idx]
    frac = v - np.floor(v)
    dist = np.minimum(frac, 1.0 - frac)
    if dist.size == 0 or dist.max() <= tol:
        return -1
    return int(int_idx[int(np.argmax(dist))])


def mip_solve(model: MilpModel, config: MipConfig | None = None, backend: str | None = None) -> MipOutcome:
    """Maximize a mixed-integer model by best-bound-first branch and bound.

    Node order is by LP bound, ties by creation order; the branching
    variable is the most fractional one (lowest index on ties). Hitting a
    node or time limit returns the current incumbent and bound.
    """
    config = config or MipConfig()
    start = time.perf_counter()
    deadline = math.inf if config.time_limit is None else start + config.time_limit
    node_limit = math.inf if config.node_limit is None else config.node_limit

    reduced, lo0, hi0, feasible = _tighten_bounds(model)
    if not feasible:
        return MipOutcome(MipStatus.INFEASIBLE, best_bound=-math.inf)
    prep = prepare(reduced)
    c = np.asarray(model.base.objective, dtype=float)
    ints = np.flatnonzero(model.integer_mask)
    lp_solves = 0

    def relax(lo, hi):
        nonlocal lp_solves
        lp_solves += 1
        return solve_prepared(prep, c, lo, hi, backend=backend)

    root = relax(lo0, hi0)
    if root.status is LpStatus.INFEASIBLE:
        return MipOutcome(MipStatus.INFEASIBLE, best_bound=-math.inf, nodes_explored=1, lp_solves=lp_solves)
    if root.status is LpStatus.UNBOUNDED:
        return MipOutcome(MipStatus.UNBOUNDED, nodes_explored=1, lp_solves=lp_solves)

    incumbent = None
    inc_val = -math.inf
    history: list[float] = []

    def accept(sol, val):
        nonlocal incumbent, inc_val
        if val > inc_val:
            s = sol.copy()
            s[ints] = np.round(s[ints])
            incumbent, inc_val = s, val

    counter = itertools.count()
    heap: list = []
    j = _most_fractional(root.solution, ints, config.int_tol)
    if j < 0:
        accept(root.solution, root.objective_value)
    else:
        heapq.heappush(heap, (-root.objective_value, next(counter), lo0, hi0, root.solution))

    nodes = 1
    best_bound = root.objective_value
    history.append(best_bound)
    status = MipStatus.OPTIMAL
    while heap:
        top = -heap[0][0]
        best_bound = min(best_bound, max(top, inc_val))
        history.append(best_bound)
        if incumbent is not None and top - inc_val <= config.gap_tolerance(inc_val):
            break
        if nodes >= node_limit:
            status = MipStatus.NODE_LIMIT
            break
        if time.perf_counter() > deadline:
            status = MipStatus.TIME_LIMIT
            break
        neg_bound, _, lo, hi, sol = heapq.heappop(heap)
        nodes += 1
        j = _most_fractional(sol, ints, config.int_tol)
        v = sol[j]
        down_hi = hi.copy()
        down_hi[j] = math.floor(v)
        up_lo = lo.copy()
        up_lo[j] = math.ceil(v)
        for clo, chi in ((lo, down_hi), (up_lo, hi)):
            child = relax(clo, chi)
            if child.status is not LpStatus.OPTIMAL:
                continue
            bound = child.objective_value
            if incumbent is not None and bound - inc_val <= config.gap_tolerance(inc_val):
                continue
            if _most_fractional(child.solution, ints, config.int_tol) < 0:
                accept(child.solution, bound)
            else:
                heapq.heappush(heap, (-bound, next(counter), clo, chi, child.solution))

    if status is MipStatus.OPTIMAL:
        if incumbent is None:
            return MipOutcome(MipStatus.INFEASIBLE, best_bound=-math.inf, nodes_explored=nodes,
                              lp_solves=lp_solves, bound_history=history)
        open_bound = -heap[0][0] if heap else -math.inf
        best_bound = min(best_bound, max(inc_val, open_bound))
    history.append(best_bound)
    return MipOutcome(status, incumbent, inc_val, best_bound, nodes, lp_solves, history)
