"""Pure-Python bounded-variable revised simplex iterations.

This is the fallback used when the compiled ``_kernel`` extension is not
available. Both implementations follow the same pivoting rules and must stay
in lockstep: Dantzig pricing, a switch to Bland's rule after ``bland_after``
iterations (or temporarily, during a run of ``stall_limit`` degenerate
pivots), explicit basis inverse with product-form updates and periodic
refactorization.
"""

import numpy as np

OPTIMAL = 0
UNBOUNDED = 1
ITERATION_LIMIT = 2
SINGULAR = 3


def _refactor(A, b, lo, hi, x, basis, Binv, is_basic):
    B = A[:, basis]
    try:
        inv = np.linalg.inv(B)
    except np.linalg.LinAlgError:
        return False
    if not np.all(np.isfinite(inv)):
        return False
    Binv[:, :] = inv
    nonbasic = ~is_basic
    rhs = b - A[:, nonbasic] @ x[nonbasic]
    x[basis] = Binv @ rhs
    return True


def simplex_iterate(A, b, c, lo, hi, x, basis, Binv, max_iter, bland_after, stall_limit,
                    opt_tol, feas_tol, pivot_tol, refactor_every):
    """Run primal simplex iterations in place until optimality.

    ``A`` is the (rows x cols) equality matrix, ``x`` holds values of every
    column (nonbasic ones sit on a bound, or at zero when free), ``basis``
    lists the basic column of each row and ``Binv`` is the inverse of
    ``A[:, basis]``. Returns ``(status, iterations)``.
    """
    m, ncols = A.shape
    is_basic = np.zeros(ncols, dtype=bool)
    is_basic[basis] = True
    can_up = np.empty(ncols, dtype=bool)
    can_down = np.empty(ncols, dtype=bool)
    it = 0
    stall = 0
    while it < max_iter:
        if it > 0 and it % refactor_every == 0:
            if not _refactor(A, b, lo, hi, x, basis, Binv, is_basic):
                return SINGULAR, it
        y = c[basis] @ Binv
        d = c - y @ A
        np.less(x, hi, out=can_up)
        np.greater(x, lo, out=can_down)
        up = (~is_basic) & can_up & (d > opt_tol)
        down = (~is_basic) & can_down & (d < -opt_tol)
        eligible = up | down
        if not eligible.any():
            return OPTIMAL, it
        bland = it >= bland_after or stall >= stall_limit
        if bland:
            q = int(np.flatnonzero(eligible)[0])
        else:
            score = np.where(eligible, np.abs(d), -1.0)
            q = int(np.argmax(score))
        direction = 1.0 if up[q] else -1.0

        alpha = Binv @ A[:, q]
        delta = direction * alpha
        theta = np.inf
        leave = -1
        leave_to_upper = False
        best_piv = 0.0
        for i in range(m):
            di = delta[i]
            if di > pivot_tol:
                bound = lo[basis[i]]
                if bound == -np.inf:
                    continue
                ratio = (x[basis[i]] - bound) / di
                to_upper = False
            elif di < -pivot_tol:
                bound = hi[basis[i]]
                if bound == np.inf:
                    continue
                ratio = (bound - x[basis[i]]) / (-di)
                to_upper = True
            else:
                continue
            if ratio < 0.0:
                ratio = 0.0
            if leave < 0 or ratio < theta - 1e-12:
                take = True
            elif ratio <= theta + 1e-12:
                if bland:
                    take = basis[i] < basis[leave]
                else:
                    take = abs(di) > best_piv
            else:
                take = False
            if take:
                theta = ratio
                leave = i
                leave_to_upper = to_upper
                best_piv = abs(di)

        span = hi[q] - lo[q]
        if span <= theta:
            # bound flip; basis unchanged
            if span == np.inf:
                return UNBOUNDED, it
            x[basis] -= span * delta
            x[q] = hi[q] if direction > 0 else lo[q]
            stall = 0
            it += 1
            continue
        if leave < 0:
            return UNBOUNDED, it

        stall = stall + 1 if theta <= 1e-12 else 0
        x[basis] -= theta * delta
        x[q] += direction * theta
        out = basis[leave]
        x[out] = hi[out] if leave_to_upper else lo[out]

        piv = alpha[leave]
        row = Binv[leave, :] / piv
        Binv -= np.outer(alpha, row)
        Binv[leave, :] = row
        basis[leave] = q
        is_basic[out] = False
        is_basic[q] = True
        it += 1
    return ITERATION_LIMIT, it
