"""Dual active-set (Goldfarb-Idnani) solver for small dense strictly convex QPs.

    minimize    0.5 x'Gx + a'x
    subject to  C x >= b

Pure numpy reference implementation; ``_qp_ext`` is a Cython port of the
same iteration and must stay in lock-step with it.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import cholesky, solve_triangular

OPTIMAL = 0
INFEASIBLE = 1
MAX_ITER = 2
NOT_CONVEX = 3


def _givens(a, b):
    h = math.hypot(a, b)
    if h == 0.0:
        return 1.0, 0.0, 0.0
    return a / h, b / h, h


def solve_qp(G, a, C, b, hint=None, max_iter=0, tol=1e-10):
    """Return ``(x, lam, status, iterations)``.

    ``lam`` holds one nonnegative multiplier per row of ``C``.  Rows listed in
    ``hint`` (a boolean mask, e.g. the previous active set) are preferred
    when choosing which violated constraint to add next.
    """
    G = np.asarray(G, dtype=float)
    a = np.asarray(a, dtype=float)
    C = np.asarray(C, dtype=float).reshape(-1, len(a))
    b = np.asarray(b, dtype=float)
    n, m = len(a), len(b)
    max_iter = max_iter or 10 * (n + m) + 20
    lam = np.zeros(m)

    try:
        Lc = cholesky(G, lower=True)
    except np.linalg.LinAlgError:
        return np.zeros(n), lam, NOT_CONVEX, 0
    J = solve_triangular(Lc, np.eye(n), lower=True).T  # J = L^{-T}
    x = -J @ (J.T @ a)

    norms = np.linalg.norm(C, axis=1)
    norms[norms == 0.0] = 1.0
    prefer = np.zeros(m, dtype=bool) if hint is None else np.asarray(hint, dtype=bool)

    R = np.zeros((n, n))
    active: list[int] = []
    u = np.zeros(n + 1)
    q = 0
    it = 0
    is_active = np.zeros(m, dtype=bool)

    while True:
        s = (C @ x - b) / norms
        s[is_active] = np.inf
        viol = s < -tol
        if not viol.any():
            lam[active] = u[:q]
            return x, lam, OPTIMAL, it
        pool = viol & prefer
        if pool.any():
            s_pick = np.where(pool, s, np.inf)
            p = int(np.argmin(s_pick))
        else:
            p = int(np.argmin(s))
        npv = C[p]
        u_p = 0.0

        while True:
            it += 1
            if it > max_iter:
                lam[active] = u[:q]
                return x, lam, MAX_ITER, it
            d = J.T @ npv
            z = J[:, q:] @ d[q:]
            r = solve_triangular(R[:q, :q], d[:q]) if q else np.zeros(0)

            t1, k = math.inf, -1
            for j in range(q):
                if r[j] > 0.0:
                    ratio = u[j] / r[j]
                    if ratio < t1:
                        t1, k = ratio, j

            zn = float(z @ npv)
            if np.max(np.abs(z)) > 1e-14 * (1.0 + np.max(np.abs(x))) and zn > 0.0:
                t2 = -(float(npv @ x) - b[p]) / zn
            else:
                t2 = math.inf

            t = min(t1, t2)
            if t == math.inf:
                lam[active] = u[:q]
                return x, lam, INFEASIBLE, it

            if t2 == math.inf:
                u[:q] -= t * r
                u_p += t
                _drop(k, active, u, R, J, q)
                is_active[:] = False
                is_active[active] = True
                q -= 1
                continue

            x = x + t * z
            u[:q] -= t * r
            u_p += t
            if t == t2:
                # add p: rotate d[q:] onto its first entry
                for j in range(n - 1, q, -1):
                    c_, s_, h = _givens(d[j - 1], d[j])
                    d[j - 1], d[j] = h, 0.0
                    cj, cj1 = J[:, j - 1].copy(), J[:, j].copy()
                    J[:, j - 1] = c_ * cj + s_ * cj1
                    J[:, j] = -s_ * cj + c_ * cj1
                R[: q + 1, q] = d[: q + 1]
                active.append(p)
                is_active[p] = True
                u[q] = u_p
                q += 1
                break
            _drop(k, active, u, R, J, q)
            is_active[:] = False
            is_active[active] = True
            q -= 1


def _drop(k, active, u, R, J, q):
    """Remove active constraint ``k`` and restore the triangular factor."""
    del active[k]
    u[k : q - 1] = u[k + 1 : q]
    u[q - 1] = 0.0
    R[:, k : q - 1] = R[:, k + 1 : q]
    R[:, q - 1] = 0.0
    for i in range(k, q - 1):
        c_, s_, h = _givens(R[i, i], R[i + 1, i])
        ri, ri1 = R[i, i:q - 1].copy(), R[i + 1, i:q - 1].copy()
        R[i, i:q - 1] = c_ * ri + s_ * ri1
        R[i + 1, i:q - 1] = -s_ * ri + c_ * ri1
        R[i + 1, i] = 0.0
        cj, cj1 = J[:, i].copy(), J[:, i + 1].copy()
        J[:, i] = c_ * cj + s_ * cj1
        J[:, i + 1] = -s_ * cj + c_ * cj1
