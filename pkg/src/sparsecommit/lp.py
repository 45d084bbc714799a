"""Dense linear programming engine.

Solves ``max c^T v`` subject to linear rows and variable bounds with a
two-phase bounded-variable revised simplex. The iteration loop lives in a
compiled kernel when available (see :mod:`sparsecommit._backend`).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _backend

FEAS_TOL = 1e-8
PIVOT_TOL = 1e-10
OPT_TOL = 1e-9
REFACTOR_EVERY = 50
# consecutive degenerate pivots before Bland takes over until the next improving step
STALL_LIMIT = 30

LE, EQ, GE = "<=", "==", ">="
_SENSE_ALIASES = {"<=": LE, "<": LE, "le": LE, "==": EQ, "=": EQ, "eq": EQ, ">=": GE, ">": GE, "ge": GE}


class LpStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


class LpNumericalError(RuntimeError):
    """Raised when the simplex fails even after the anti-cycling fallback."""


@dataclass(frozen=True)
class LpModel:
    """``max objective @ v`` s.t. ``A @ v (senses) rhs`` and ``lower <= v <= upper``."""

    objective: np.ndarray
    A: np.ndarray
    senses: tuple
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).reshape(-1)
        n = c.size
        A = np.asarray(self.A, dtype=float)
        if A.size == 0:
            A = A.reshape(0, n)
        if A.ndim != 2 or A.shape[1] != n:
            raise ValueError(f"constraint matrix must have {n} columns, got shape {A.shape}")
        rhs = np.asarray(self.rhs, dtype=float).reshape(-1)
        if rhs.size != A.shape[0]:
            raise ValueError("rhs length must equal number of constraints")
        senses = tuple(_SENSE_ALIASES.get(s, None) for s in self.senses)
        if len(senses) != A.shape[0] or None in senses:
            raise ValueError(f"invalid constraint senses {self.senses!r}")
        lower = np.asarray(self.lower, dtype=float).reshape(-1)
        upper = np.asarray(self.upper, dtype=float).reshape(-1)
        if lower.size != n or upper.size != n:
            raise ValueError("bounds must have one entry per variable")
        if not np.all(np.isfinite(c)) or not np.all(np.isfinite(A)):
            raise ValueError("objective and constraint coefficients must be finite")
        if not np.all(np.isfinite(rhs)):
            raise ValueError("rhs must be finite")
        if np.any(lower > upper) or np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise ValueError("every variable needs lower <= upper")
        if np.any(lower == np.inf) or np.any(upper == -np.inf):
            raise ValueError("bounds cannot exclude every finite value")
        for name, arr in (("objective", c), ("A", A), ("rhs", rhs), ("lower", lower), ("upper", upper)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "senses", senses)

    @property
    def num_vars(self) -> int:
        return self.objective.size

    @property
    def num_constraints(self) -> int:
        return self.A.shape[0]

    @property
    def constraints(self) -> list[tuple[np.ndarray, str, float]]:
        return [(self.A[i], self.senses[i], float(self.rhs[i])) for i in range(self.num_constraints)]

    @property
    def bounds(self) -> list[tuple[float, float]]:
        return list(zip(self.lower.tolist(), self.upper.tolist()))

    def with_bounds(self, lower, upper) -> "LpModel":
        return LpModel(self.objective, self.A, self.senses, self.rhs, lower, upper)

    def with_objective(self, objective) -> "LpModel":
        return LpModel(objective, self.A, self.senses, self.rhs, self.lower, self.upper)

    def permuted_rows(self, order: Sequence[int]) -> "LpModel":
        order = list(order)
        return LpModel(self.objective, self.A[order], tuple(self.senses[i] for i in order),
                       self.rhs[order], self.lower, self.upper)

    @classmethod
    def from_rows(cls, objective, constraints, bounds) -> "LpModel":
        """Build from ``[(coeffs, sense, rhs), ...]`` and ``[(lo, hi), ...]``.

        ``None`` in a bound means infinite.
        """
        objective = np.asarray(objective, dtype=float)
        n = objective.size
        A = np.array([np.asarray(r[0], dtype=float) for r in constraints]).reshape(len(constraints), n)
        lo = [(-np.inf if b[0] is None else b[0]) for b in bounds]
        hi = [(np.inf if b[1] is None else b[1]) for b in bounds]
        return cls(objective, A, tuple(r[1] for r in constraints), [r[2] for r in constraints], lo, hi)


@dataclass
class LpOutcome:
    status: LpStatus
    solution: np.ndarray | None = None
    objective_value: float = float("nan")
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


@dataclass
class _Prepared:
    """Row-presolved model in equality form ``[A | I] (v, s) = b``."""

    n: int
    m: int
    keep: np.ndarray
    A: np.ndarray
    b: np.ndarray
    slack_lo: np.ndarray
    slack_hi: np.ndarray
    infeasible: bool = False
    total_rows: int = 0
    scale: float = field(default=1.0)


def prepare(model: LpModel) -> _Prepared:
    A = model.A
    n = model.num_vars
    nonempty = np.any(A != 0.0, axis=1) if A.shape[0] else np.zeros(0, dtype=bool)
    infeasible = False
    for i in np.flatnonzero(~nonempty):
        r, s = model.rhs[i], model.senses[i]
        if (s == LE and r < -FEAS_TOL) or (s == GE and r > FEAS_TOL) or (s == EQ and abs(r) > FEAS_TOL):
            infeasible = True
    keep = np.flatnonzero(nonempty)
    Ar = A[keep]
    m = keep.size
    senses = [model.senses[i] for i in keep]
    slack_lo = np.array([0.0 if s in (LE, EQ) else -np.inf for s in senses])
    slack_hi = np.array([np.inf if s == LE else 0.0 for s in senses])
    A_eq = np.hstack([Ar, np.eye(m)]) if m else np.zeros((0, n))
    b = model.rhs[keep].astype(float)
    scale = 1.0 + (float(np.max(np.abs(b))) if m else 0.0)
    return _Prepared(n, m, keep, A_eq, b, slack_lo, slack_hi, infeasible, A.shape[0], scale)


def _bounds_only(c, lower, upper) -> tuple[LpStatus, np.ndarray]:
    x = np.where(np.isfinite(lower), lower, np.where(np.isfinite(upper), upper, 0.0))
    for j, cj in enumerate(c):
        if cj > 0:
            if upper[j] == np.inf:
                return LpStatus.UNBOUNDED, x
            x[j] = upper[j]
        elif cj < 0:
            if lower[j] == -np.inf:
                return LpStatus.UNBOUNDED, x
            x[j] = lower[j]
    return LpStatus.OPTIMAL, x


def solve_prepared(prep: _Prepared, c: np.ndarray, lower: np.ndarray, upper: np.ndarray,
                   backend: str | None = None) -> LpOutcome:
    """Solve a prepared model with the given objective and structural bounds."""
    try:
        return _solve_prepared(prep, c, lower, upper, _backend.get_kernel(backend))
    except _Singular:
        if _backend.get_kernel(backend) is _backend.get_kernel("python"):
            raise LpNumericalError("basis matrix became singular") from None
        # LAPACK-backed inverses in the pure-Python kernel are more forgiving
        return solve_prepared(prep, c, lower, upper, backend="python")


class _Singular(Exception):
    pass


def _solve_prepared(prep: _Prepared, c, lower, upper, kernel) -> LpOutcome:
    n, m = prep.n, prep.m
    if prep.infeasible:
        return LpOutcome(LpStatus.INFEASIBLE)
    if m == 0:
        status, x = _bounds_only(c, lower, upper)
        if status is not LpStatus.OPTIMAL:
            return LpOutcome(status)
        duals = np.zeros(prep.total_rows)
        return LpOutcome(status, x, float(c @ x), duals, c.copy(), 0)

    x0 = np.where(np.isfinite(lower), lower, np.where(np.isfinite(upper), upper, 0.0))
    resid = prep.b - prep.A[:, :n] @ x0
    slack_val = np.clip(resid, prep.slack_lo, prep.slack_hi)
    rem = resid - slack_val
    needs_art = np.abs(rem) > 0.0
    art_rows = np.flatnonzero(needs_art)
    n_art = art_rows.size

    ncols = n + m + n_art
    A = np.zeros((m, ncols))
    A[:, : n + m] = prep.A
    signs = np.where(rem[art_rows] >= 0, 1.0, -1.0)
    A[art_rows, n + m + np.arange(n_art)] = signs
    lo = np.concatenate([lower, prep.slack_lo, np.zeros(n_art)])
    hi = np.concatenate([upper, prep.slack_hi, np.full(n_art, np.inf)])
    x = np.concatenate([x0, slack_val, np.abs(rem[art_rows])])
    basis = np.arange(n, n + m, dtype=np.intp)
    basis[art_rows] = n + m + np.arange(n_art)
    diag = np.ones(m)
    diag[art_rows] = signs
    Binv = np.diag(1.0 / diag)

    bland_after = 5 * (n + m)
    max_iter = 50 * (ncols + m) + 1000
    total_iters = 0

    def run(cost):
        nonlocal total_iters
        status, iters = kernel(A, prep.b, cost, lo, hi, x, basis, Binv, max_iter, bland_after, STALL_LIMIT,
                               OPT_TOL, FEAS_TOL, PIVOT_TOL, REFACTOR_EVERY)
        total_iters += iters
        if status == 2:
            raise LpNumericalError(f"simplex did not terminate within {max_iter} iterations")
        if status == 3:
            raise _Singular
        return status

    if n_art:
        c1 = np.zeros(ncols)
        c1[n + m:] = -1.0
        run(c1)
        if float(np.sum(x[n + m:])) > 10 * FEAS_TOL * prep.scale:
            return LpOutcome(LpStatus.INFEASIBLE, iterations=total_iters)
        # artificials still basic stay at zero level for phase 2
        hi[n + m:] = 0.0

    c2 = np.zeros(ncols)
    c2[:n] = c
    status = run(c2)
    if status == 1:
        return LpOutcome(LpStatus.UNBOUNDED, iterations=total_iters)

    sol = x[:n].copy()
    # clean tiny bound violations introduced by roundoff
    sol = np.minimum(np.maximum(sol, lower), upper)
    y = c2[basis] @ Binv
    reduced = c - y @ A[:, :n]
    duals = np.zeros(prep.total_rows)
    duals[prep.keep] = y
    return LpOutcome(LpStatus.OPTIMAL, sol, float(c @ sol), duals, reduced, total_iters)


def lp_solve(model: LpModel, backend: str | None = None) -> LpOutcome:
    """Solve ``model`` to optimality, infeasibility or unboundedness.

    ``backend`` selects ``"compiled"`` or ``"python"``; default is whatever
    was picked at import.
    """
    prep = prepare(model)
    return solve_prepared(prep, np.asarray(model.objective, dtype=float),
                          np.array(model.lower, dtype=float), np.array(model.upper, dtype=float),
                          backend=backend)
