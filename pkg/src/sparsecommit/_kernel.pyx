# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled bounded-variable revised simplex iterations.

Same contract and pivoting rules as ``_kernel_py.simplex_iterate``.
"""

from libc.math cimport fabs, INFINITY
from libc.stdlib cimport malloc, free

cdef int OPTIMAL = 0
cdef int UNBOUNDED = 1
cdef int ITERATION_LIMIT = 2
cdef int SINGULAR = 3


cdef int _invert(double[:, ::1] A, Py_ssize_t[::1] basis, double[:, ::1] Binv,
                 double* work) noexcept nogil:
    # Gauss-Jordan with partial pivoting on [B | I]; work is m*m scratch
    cdef Py_ssize_t m = basis.shape[0]
    cdef Py_ssize_t i, j, k, p
    cdef double best, f, t
    for i in range(m):
        for j in range(m):
            work[i * m + j] = A[i, basis[j]]
            Binv[i, j] = 1.0 if i == j else 0.0
    for k in range(m):
        p = k
        best = fabs(work[k * m + k])
        for i in range(k + 1, m):
            if fabs(work[i * m + k]) > best:
                best = fabs(work[i * m + k])
                p = i
        if best == 0.0 or best != best:
            return 0
        if p != k:
            for j in range(m):
                t = work[k * m + j]
                work[k * m + j] = work[p * m + j]
                work[p * m + j] = t
                t = Binv[k, j]
                Binv[k, j] = Binv[p, j]
                Binv[p, j] = t
        f = 1.0 / work[k * m + k]
        for j in range(m):
            work[k * m + j] *= f
            Binv[k, j] *= f
        for i in range(m):
            if i == k:
                continue
            f = work[i * m + k]
            if f == 0.0:
                continue
            for j in range(m):
                work[i * m + j] -= f * work[k * m + j]
                Binv[i, j] -= f * Binv[k, j]
    return 1


cdef void _recompute_basic(double[:, ::1] A, double[::1] b, double[::1] x,
                           Py_ssize_t[::1] basis, double[:, ::1] Binv,
                           char* is_basic, double* rhs) noexcept nogil:
    cdef Py_ssize_t m = A.shape[0]
    cdef Py_ssize_t n = A.shape[1]
    cdef Py_ssize_t i, j
    cdef double s
    for i in range(m):
        s = b[i]
        for j in range(n):
            if not is_basic[j] and x[j] != 0.0:
                s -= A[i, j] * x[j]
        rhs[i] = s
    for i in range(m):
        s = 0.0
        for j in range(m):
            s += Binv[i, j] * rhs[j]
        x[basis[i]] = s


def simplex_iterate(double[:, ::1] A, double[::1] b, double[::1] c,
                    double[::1] lo, double[::1] hi, double[::1] x,
                    Py_ssize_t[::1] basis, double[:, ::1] Binv,
                    Py_ssize_t max_iter, Py_ssize_t bland_after, Py_ssize_t stall_limit,
                    double opt_tol, double feas_tol, double pivot_tol,
                    Py_ssize_t refactor_every):
    cdef Py_ssize_t m = A.shape[0]
    cdef Py_ssize_t n = A.shape[1]
    cdef Py_ssize_t i, j, q, leave, out
    cdef Py_ssize_t it = 0
    cdef Py_ssize_t stall = 0
    cdef int status = ITERATION_LIMIT
    cdef bint bland, take, leave_to_upper, to_upper
    cdef double dj, best, direction, theta, ratio, di, bound, best_piv, span
    cdef double piv, a_i

    cdef double* y = <double*> malloc(m * sizeof(double))
    cdef double* alpha = <double*> malloc(m * sizeof(double))
    cdef double* row = <double*> malloc(m * sizeof(double))
    cdef double* work = <double*> malloc(m * m * sizeof(double))
    cdef char* is_basic = <char*> malloc(n * sizeof(char))
    if y == NULL or alpha == NULL or row == NULL or work == NULL or is_basic == NULL:
        free(y); free(alpha); free(row); free(work); free(is_basic)
        raise MemoryError()

    with nogil:
        for j in range(n):
            is_basic[j] = 0
        for i in range(m):
            is_basic[basis[i]] = 1

        while it < max_iter:
            if it > 0 and it % refactor_every == 0:
                if not _invert(A, basis, Binv, work):
                    status = SINGULAR
                    break
                _recompute_basic(A, b, x, basis, Binv, is_basic, work)

            # y = c_B^T Binv
            for j in range(m):
                y[j] = 0.0
            for i in range(m):
                dj = c[basis[i]]
                if dj != 0.0:
                    for j in range(m):
                        y[j] += dj * Binv[i, j]

            bland = it >= bland_after or stall >= stall_limit
            q = -1
            best = -1.0
            direction = 0.0
            for j in range(n):
                if is_basic[j]:
                    continue
                dj = c[j]
                for i in range(m):
                    a_i = A[i, j]
                    if a_i != 0.0:
                        dj -= y[i] * a_i
                if dj > opt_tol and x[j] < hi[j]:
                    if bland:
                        q = j
                        direction = 1.0
                        break
                    if dj > best:
                        best = dj
                        q = j
                        direction = 1.0
                elif dj < -opt_tol and x[j] > lo[j]:
                    if bland:
                        q = j
                        direction = -1.0
                        break
                    if -dj > best:
                        best = -dj
                        q = j
                        direction = -1.0
            if q < 0:
                status = OPTIMAL
                break

            for i in range(m):
                a_i = 0.0
                for j in range(m):
                    a_i += Binv[i, j] * A[j, q]
                alpha[i] = a_i

            theta = INFINITY
            leave = -1
            leave_to_upper = False
            best_piv = 0.0
            for i in range(m):
                di = direction * alpha[i]
                if di > pivot_tol:
                    bound = lo[basis[i]]
                    if bound == -INFINITY:
                        continue
                    ratio = (x[basis[i]] - bound) / di
                    to_upper = False
                elif di < -pivot_tol:
                    bound = hi[basis[i]]
                    if bound == INFINITY:
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
                        take = fabs(di) > best_piv
                else:
                    take = False
                if take:
                    theta = ratio
                    leave = i
                    leave_to_upper = to_upper
                    best_piv = fabs(di)

            span = hi[q] - lo[q]
            if span <= theta:
                if span == INFINITY:
                    status = UNBOUNDED
                    break
                for i in range(m):
                    x[basis[i]] -= span * direction * alpha[i]
                x[q] = hi[q] if direction > 0 else lo[q]
                stall = 0
                it += 1
                continue
            if leave < 0:
                status = UNBOUNDED
                break

            stall = stall + 1 if theta <= 1e-12 else 0
            for i in range(m):
                x[basis[i]] -= theta * direction * alpha[i]
            x[q] += direction * theta
            out = basis[leave]
            x[out] = hi[out] if leave_to_upper else lo[out]

            piv = alpha[leave]
            for j in range(m):
                row[j] = Binv[leave, j] / piv
            for i in range(m):
                a_i = alpha[i]
                if i == leave or a_i == 0.0:
                    continue
                for j in range(m):
                    Binv[i, j] -= a_i * row[j]
            for j in range(m):
                Binv[leave, j] = row[j]
            basis[leave] = q
            is_basic[out] = 0
            is_basic[q] = 1
            it += 1

    free(y); free(alpha); free(row); free(work); free(is_basic)
    return status, it
