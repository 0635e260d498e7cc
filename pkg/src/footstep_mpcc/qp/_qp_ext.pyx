# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Cython port of the dual active-set QP iteration in ``_qp_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, hypot, INFINITY

cnp.import_array()

cdef enum:
    OPTIMAL = 0
    INFEASIBLE = 1
    MAX_ITER = 2
    NOT_CONVEX = 3


cdef inline void _rot_cols(double[:, ::1] J, Py_ssize_t n, Py_ssize_t i, Py_ssize_t j,
                           double c, double s) noexcept nogil:
    cdef Py_ssize_t r
    cdef double a, b
    for r in range(n):
        a = J[r, i]
        b = J[r, j]
        J[r, i] = c * a + s * b
        J[r, j] = -s * a + c * b


cdef void _drop(Py_ssize_t k, Py_ssize_t q, Py_ssize_t n, long[::1] active,
                double[::1] u, double[:, ::1] R, double[:, ::1] J) noexcept nogil:
    cdef Py_ssize_t i, col, r
    cdef double c, s, h, a, b
    for i in range(k, q - 1):
        active[i] = active[i + 1]
        u[i] = u[i + 1]
    u[q - 1] = 0.0
    for col in range(k, q - 1):
        for r in range(n):
            R[r, col] = R[r, col + 1]
    for r in range(n):
        R[r, q - 1] = 0.0
    for i in range(k, q - 1):
        a = R[i, i]
        b = R[i + 1, i]
        h = hypot(a, b)
        if h == 0.0:
            c = 1.0
            s = 0.0
        else:
            c = a / h
            s = b / h
        for col in range(i, q - 1):
            a = R[i, col]
            b = R[i + 1, col]
            R[i, col] = c * a + s * b
            R[i + 1, col] = -s * a + c * b
        R[i + 1, i] = 0.0
        _rot_cols(J, n, i, i + 1, c, s)


def solve_qp(G, a, C, b, hint=None, Py_ssize_t max_iter=0, double tol=1e-10):
    """Same contract as :func:`footstep_mpcc.qp._qp_py.solve_qp`."""
    cdef double[:, ::1] Gv = np.ascontiguousarray(G, dtype=np.float64)
    cdef double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef Py_ssize_t n = av.shape[0]
    cdef double[:, ::1] Cv = np.ascontiguousarray(np.asarray(C, dtype=np.float64).reshape(-1, n))
    cdef double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t m = bv.shape[0]
    if max_iter <= 0:
        max_iter = 10 * (n + m) + 20

    x_arr = np.zeros(n)
    lam_arr = np.zeros(m)
    cdef double[::1] x = x_arr
    cdef double[::1] lam = lam_arr

    cdef double[:, ::1] L = np.zeros((n, n))
    cdef double[:, ::1] J = np.zeros((n, n))
    cdef double[:, ::1] R = np.zeros((n, n))
    cdef double[::1] d = np.zeros(n)
    cdef double[::1] z = np.zeros(n)
    cdef double[::1] r = np.zeros(n)
    cdef double[::1] u = np.zeros(n + 1)
    cdef double[::1] norms = np.zeros(m)
    cdef double[::1] tmp = np.zeros(n)
    cdef long[::1] active = np.zeros(n + 1, dtype=np.int_)
    cdef cnp.uint8_t[::1] is_active = np.zeros(m, dtype=np.uint8)
    cdef cnp.uint8_t[::1] prefer = np.zeros(m, dtype=np.uint8)
    if hint is not None:
        prefer = np.ascontiguousarray(hint, dtype=np.uint8)

    cdef Py_ssize_t i, j, k, p, q = 0, it = 0
    cdef double acc, sval, best, best_pref, t1, t2, t, zn, u_p, c_, s_, h, zmax, xmax, ratio, aa, bb
    cdef bint has_pref

    # Cholesky G = L L^T
    for j in range(n):
        acc = Gv[j, j]
        for k in range(j):
            acc -= L[j, k] * L[j, k]
        if acc <= 0.0:
            return x_arr, lam_arr, NOT_CONVEX, 0
        L[j, j] = sqrt(acc)
        for i in range(j + 1, n):
            acc = Gv[i, j]
            for k in range(j):
                acc -= L[i, k] * L[j, k]
            L[i, j] = acc / L[j, j]
    # J = L^{-T}: solve L Y = I column by column, J = Y^T
    for j in range(n):
        for i in range(n):
            acc = 1.0 if i == j else 0.0
            for k in range(i):
                acc -= L[i, k] * J[j, k]
            J[j, i] = acc / L[i, i]
    # x = -J J^T a
    for i in range(n):
        acc = 0.0
        for k in range(n):
            acc += J[k, i] * av[k]
        tmp[i] = acc
    for i in range(n):
        acc = 0.0
        for k in range(n):
            acc += J[i, k] * tmp[k]
        x[i] = -acc

    for i in range(m):
        acc = 0.0
        for k in range(n):
            acc += Cv[i, k] * Cv[i, k]
        norms[i] = sqrt(acc) if acc > 0.0 else 1.0

    while True:
        p = -1
        best = -tol
        best_pref = -tol
        has_pref = False
        k = -1
        for i in range(m):
            if is_active[i]:
                continue
            acc = -bv[i]
            for j in range(n):
                acc += Cv[i, j] * x[j]
            sval = acc / norms[i]
            if sval < -tol:
                if prefer[i] and sval < best_pref:
                    best_pref = sval
                    k = i
                    has_pref = True
                if sval < best:
                    best = sval
                    p = i
        if has_pref:
            p = k
        if p < 0:
            for i in range(q):
                lam[active[i]] = u[i]
            return x_arr, lam_arr, OPTIMAL, it
        u_p = 0.0

        while True:
            it += 1
            if it > max_iter:
                for i in range(q):
                    lam[active[i]] = u[i]
                return x_arr, lam_arr, MAX_ITER, it
            for i in range(n):
                acc = 0.0
                for k in range(n):
                    acc += J[k, i] * Cv[p, k]
                d[i] = acc
            zmax = 0.0
            xmax = 0.0
            zn = 0.0
            for i in range(n):
                acc = 0.0
                for k in range(q, n):
                    acc += J[i, k] * d[k]
                z[i] = acc
                if fabs(acc) > zmax:
                    zmax = fabs(acc)
                if fabs(x[i]) > xmax:
                    xmax = fabs(x[i])
                zn += acc * Cv[p, i]
            # r = R^{-1} d[:q]
            for i in range(q - 1, -1, -1):
                acc = d[i]
                for k in range(i + 1, q):
                    acc -= R[i, k] * r[k]
                r[i] = acc / R[i, i]

            t1 = INFINITY
            k = -1
            for j in range(q):
                if r[j] > 0.0:
                    ratio = u[j] / r[j]
                    if ratio < t1:
                        t1 = ratio
                        k = j

            if zmax > 1e-14 * (1.0 + xmax) and zn > 0.0:
                acc = -bv[p]
                for i in range(n):
                    acc += Cv[p, i] * x[i]
                t2 = -acc / zn
            else:
                t2 = INFINITY

            t = t1 if t1 < t2 else t2
            if t == INFINITY:
                for i in range(q):
                    lam[active[i]] = u[i]
                return x_arr, lam_arr, INFEASIBLE, it

            if t2 == INFINITY:
                for j in range(q):
                    u[j] -= t * r[j]
                u_p += t
                is_active[active[k]] = 0
                _drop(k, q, n, active, u, R, J)
                q -= 1
                continue

            for i in range(n):
                x[i] += t * z[i]
            for j in range(q):
                u[j] -= t * r[j]
            u_p += t
            if t == t2:
                for j in range(n - 1, q, -1):
                    aa = d[j - 1]
                    bb = d[j]
                    h = hypot(aa, bb)
                    if h == 0.0:
                        c_ = 1.0
                        s_ = 0.0
                    else:
                        c_ = aa / h
                        s_ = bb / h
                    d[j - 1] = h
                    d[j] = 0.0
                    _rot_cols(J, n, j - 1, j, c_, s_)
                for i in range(q + 1):
                    R[i, q] = d[i]
                active[q] = p
                is_active[p] = 1
                u[q] = u_p
                q += 1
                break
            is_active[active[k]] = 0
            _drop(k, q, n, active, u, R, J)
            q -= 1
