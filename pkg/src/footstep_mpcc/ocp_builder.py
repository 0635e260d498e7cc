"""Condensed finite-horizon contouring-control program for the LIP.

Decision vector layout (``n = 4N``)::

    z = [ux_0, uy_0, ut_0, ..., ux_{N-1}, uy_{N-1}, ut_{N-1}, v_0, ..., v_{N-1}]

States are eliminated through the linear step map, so every COM position
over the horizon is affine in ``z``.  Constraint residuals are oriented so
that ``c(z) >= 0`` is feasible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import lip_model
from .error_frames import CARTESIAN, ErrorWeights
from .lip_model import LipParams, LipState
from .obstacle_field import Obstacle
from .path_geometry import Path, slope_rate

LEFT = "left"
RIGHT = "right"

RECTANGLE = "rectangle"
DISTANCE = "distance"
CBF = "cbf"
V_BOUNDS = "v-bounds"
THETA_DOMAIN = "theta-domain"

LINEAR_TAGS = frozenset({V_BOUNDS, THETA_DOMAIN})


def other_foot(foot: str) -> str:
    return RIGHT if foot == LEFT else LEFT


@dataclass(frozen=True)
class OcpSpec:
    """Problem data shared by every MPC solve of one scenario.

    ``rect_lb``/``rect_ub`` bound ``(x_c, y_c, theta)`` of the heading-aligned
    reachability rectangle for a *right* stance foot; the lateral interval is
    mirrored for a left stance foot.
    """

    horizon: int = 5
    weights: ErrorWeights = field(default_factory=ErrorWeights)
    input_weight: tuple[float, float, float] = (100.0, 100.0, 5.0)
    progress_weight: float = 10.0
    v_max: float = 0.3
    rect_lb: tuple[float, float, float] = (-0.25, 0.1, -0.3)
    rect_ub: tuple[float, float, float] = (0.6, 0.4, 0.3)
    delta_min: float = 0.02
    delta_max: float = 0.7
    gamma: float = 0.3
    obstacles: tuple[Obstacle, ...] = ()
    lip: LipParams = field(default_factory=LipParams)

    def __post_init__(self):
        object.__setattr__(self, "input_weight", tuple(float(v) for v in self.input_weight))
        object.__setattr__(self, "rect_lb", tuple(float(v) for v in self.rect_lb))
        object.__setattr__(self, "rect_ub", tuple(float(v) for v in self.rect_ub))
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        self.validate()

    def validate(self):
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ValueError("horizon must be an integer >= 1")
        if len(self.input_weight) != 3 or min(self.input_weight) <= 0:
            raise ValueError("input_weight needs three positive entries")
        if not self.progress_weight > 0:
            raise ValueError("progress_weight must be positive")
        if not self.v_max > 0:
            raise ValueError("v_max must be positive")
        if len(self.rect_lb) != 3 or len(self.rect_ub) != 3:
            raise ValueError("rectangle bounds need three entries")
        if any(lo >= hi for lo, hi in zip(self.rect_lb, self.rect_ub)):
            raise ValueError("rectangle bounds need lb < ub componentwise")
        if not 0 <= self.delta_min < self.delta_max:
            raise ValueError("step distance bounds need 0 <= delta_min < delta_max")
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")

    def rectangle(self, foot: str) -> tuple[np.ndarray, np.ndarray]:
        lb = np.array(self.rect_lb)
        ub = np.array(self.rect_ub)
        if foot == LEFT:
            lb[1], ub[1] = -self.rect_ub[1], -self.rect_lb[1]
        elif foot != RIGHT:
            raise ValueError(f"stance foot must be 'left' or 'right', got {foot!r}")
        return lb, ub

    def with_obstacles(self, obstacles) -> "OcpSpec":
        from dataclasses import replace

        return replace(self, obstacles=tuple(obstacles))


def _frames(phi):
    s, c = np.sin(phi), np.cos(phi)
    P = np.empty((len(phi), 2, 2))
    P[:, 0, 0], P[:, 0, 1], P[:, 1, 0], P[:, 1, 1] = s, -c, -c, -s
    dP = np.empty_like(P)
    dP[:, 0, 0], dP[:, 0, 1], dP[:, 1, 0], dP[:, 1, 1] = c, s, s, -c
    return P, dP


class Nlp:
    """Compiled program; immutable after construction."""

    def __init__(self, spec: OcpSpec, x_init: LipState, theta_init: float, path: Path, stance: str):
        spec.validate()
        if not 0.0 <= theta_init <= path.domain_end:
            raise ValueError(f"theta_init={theta_init} outside [0, {path.domain_end}]")
        N = spec.horizon
        n = 4 * N
        self.spec = spec
        self.path = path
        self.x_init = x_init
        self.theta_init = float(theta_init)
        self.stance = stance
        self.N, self.n = N, n

        A, B = lip_model.step_matrices(spec.lip)
        # x_l = s0[l] + S[l] @ z for l = 0..N
        s0 = np.zeros((N + 1, 5))
        S = np.zeros((N + 1, 5, n))
        s0[0] = x_init.as_array()
        for l in range(N):
            s0[l + 1] = A @ s0[l]
            S[l + 1] = A @ S[l]
            S[l + 1][:, 3 * l : 3 * l + 3] += B
        self.s0, self.S = s0, S
        self.pos0 = s0[:, [0, 2]]
        self.Gp = S[:, [0, 2], :]

        # theta_l = theta_init + L[l] @ z
        L = np.zeros((N + 1, n))
        for l in range(1, N + 1):
            L[l, 3 * N : 3 * N + l] = 1.0
        self.L = L

        # rectangle heading psi_l = theta_0 + sum_{j <= l} ut_j
        M = np.zeros((N, n))
        for l in range(N):
            M[l, 2 : 3 * (l + 1) : 3] = 1.0
        self.M = M
        feet = [stance if l % 2 == 0 else other_foot(stance) for l in range(N)]
        self.feet = feet
        rect = [spec.rectangle(f) for f in feet]
        self.rect_lb = np.array([r[0] for r in rect])
        self.rect_ub = np.array([r[1] for r in rect])

        diag_run = spec.weights.running_diag()
        diag_term = spec.weights.terminal_diag()
        self.err_w = np.vstack([np.tile(diag_run, (N, 1)), diag_term])
        self.cartesian = spec.weights.mode == CARTESIAN
        self.R = np.array(spec.input_weight)
        self.rho = spec.progress_weight

        T = spec.lip.step_duration
        self.obs_pos = np.array(
            [[o.predict(l, T) for l in range(N + 1)] for o in spec.obstacles]
        ).reshape(len(spec.obstacles), N + 1, 2)
        self.obs_r2 = np.array([o.effective_radius**2 for o in spec.obstacles])
        n_obs = len(spec.obstacles)

        self.tags = (
            [RECTANGLE] * (6 * N) + [DISTANCE] * (2 * N) + [CBF] * (n_obs * N)
            + [V_BOUNDS] * (2 * N) + [THETA_DOMAIN]
        )
        self.m = len(self.tags)
        self.linear_rows = np.array([t in LINEAR_TAGS for t in self.tags])
        self.lower = np.concatenate([np.full(3 * N, -np.inf), np.zeros(N)])
        self.upper = np.concatenate([np.full(3 * N, np.inf), np.full(N, spec.v_max)])

        # Constant Hessians of the quadratic rows (distance and barrier).
        GD = self.Gp[1:] - self.Gp[:-1]
        HD = 2.0 * np.einsum("lin,lim->lnm", GD, GD)
        HG = 2.0 * np.einsum("lin,lim->lnm", self.Gp, self.Gp)
        Hcbf = HG[1:] - (1.0 - spec.gamma) * HG[:-1]
        self._quad_start = 6 * N
        self._quad_hess = np.concatenate([HD, -HD] + [Hcbf] * n_obs, axis=0)
        self.GD = GD

    # ------------------------------------------------------------------ helpers
    def split(self, z):
        z = np.asarray(z, dtype=float)
        return z[: 3 * self.N].reshape(self.N, 3), z[3 * self.N :]

    def states(self, z) -> np.ndarray:
        """State trajectory ``(N+1, 5)`` implied by ``z``."""
        return self.s0 + self.S @ np.asarray(z, dtype=float)

    def thetas(self, z) -> np.ndarray:
        return self.theta_init + self.L @ np.asarray(z, dtype=float)

    def positions(self, z) -> np.ndarray:
        return self.pos0 + self.Gp @ np.asarray(z, dtype=float)

    def zero_guess(self) -> np.ndarray:
        return np.zeros(self.n)

    # --------------------------------------------------------------------- cost
    def _local(self, pos, th):
        """Errors, their theta-derivative and the frame at fixed positions."""
        ev = self.path.evaluate(th)
        e = pos - ev.point
        live = ~np.asarray(ev.clamped)
        if self.cartesian:
            eb, de_dth = e, -ev.d1
            P = np.broadcast_to(np.eye(2), (len(th), 2, 2))
            cross = np.zeros_like(P)
        else:
            phi = np.arctan2(ev.d1[:, 1], ev.d1[:, 0])
            P, dP = _frames(phi)
            eb = np.einsum("kij,kj->ki", P, e)
            rate = slope_rate(ev.d1, ev.d2)
            de_dth = rate[:, None] * np.einsum("kij,kj->ki", dP, e) - np.einsum("kij,kj->ki", P, ev.d1)
            cross = rate[:, None, None] * dP
        return eb, de_dth * live[:, None], P, cross * live[:, None, None]

    def _errors(self, z):
        """Weighted-frame errors and their Jacobian ``(N+1, 2, n)``."""
        eb, de_dth, P, _ = self._local(self.positions(z), self.thetas(z))
        J = np.einsum("kij,kjn->kin", P, self.Gp)
        J += de_dth[:, :, None] * self.L[:, None, :]
        return eb, J

    def _error_curvature(self, z, we):
        """``sum_k sum_i we[k, i] * Hess(e[k, i])``.

        Positions and path parameters are affine in ``z``, so each error
        Hessian lives in the span of ``L_k`` and ``Gp_k``.  The pure
        parameter term is a central difference of the analytic derivative.
        """
        pos = self.positions(z)
        th = self.thetas(z)
        _, _, _, cross = self._local(pos, th)
        h = 1e-5 * (1.0 + np.abs(th))
        lo = np.maximum(th - h, 0.0)
        hi = np.minimum(th + h, self.path.domain_end)
        _, d_hi, _, _ = self._local(pos, hi)
        _, d_lo, _, _ = self._local(pos, lo)
        span = np.where(hi > lo, hi - lo, 1.0)
        e_tt = (d_hi - d_lo) / span[:, None]
        a = np.einsum("ki,ki->k", we, e_tt)
        c = np.einsum("ki,kij,kjn->kn", we, cross, self.Gp)
        H = np.einsum("k,kn,km->nm", a, self.L, self.L)
        Hc = np.einsum("kn,km->nm", self.L, c)
        return H + Hc + Hc.T

    def errors(self, z) -> np.ndarray:
        """``(N+1, 2)`` errors in the weighting frame (contour/lag or x/y)."""
        return self._errors(z)[0]

    def eval_cost(self, z, hessian: bool = False):
        """Cost, gradient and, on request, the exact Hessian."""
        z = np.asarray(z, dtype=float)
        U, V = self.split(z)
        eb, J = self._errors(z)
        we = self.err_w * eb
        f = float(np.sum(we * eb) + np.sum(U * U * self.R) - self.rho * np.sum(V * V))
        g = 2.0 * np.einsum("ki,kin->n", we, J)
        g[: 3 * self.N] += 2.0 * (U * self.R).ravel()
        g[3 * self.N :] -= 2.0 * self.rho * V
        if not hessian:
            return f, g
        H = 2.0 * np.einsum("kin,ki,kim->nm", J, self.err_w, J)
        H += 2.0 * self._error_curvature(z, we)
        idx = np.arange(self.n)
        H[idx[: 3 * self.N], idx[: 3 * self.N]] += 2.0 * np.tile(self.R, self.N)
        H[idx[3 * self.N :], idx[3 * self.N :]] -= 2.0 * self.rho
        return f, g, H

    # -------------------------------------------------------------- constraints
    def eval_constraints(self, z):
        """Residual vector ``c`` (feasible iff ``c >= 0``) and Jacobian."""
        z = np.asarray(z, dtype=float)
        N, n = self.N, self.n
        U, V = self.split(z)
        c = np.empty(self.m)
        Jc = np.zeros((self.m, n))

        psi = self.x_init.theta + self.M @ z
        cs, sn = np.cos(psi), np.sin(psi)
        ux, uy, ut = U[:, 0], U[:, 1], U[:, 2]
        rx = cs * ux + sn * uy
        ry = -sn * ux + cs * uy
        rot = np.stack([rx, ry, ut], axis=1)
        ix = np.arange(N)
        drot = np.zeros((N, 3, n))
        drot[ix, 0, 3 * ix] = cs
        drot[ix, 0, 3 * ix + 1] = sn
        drot[ix, 1, 3 * ix] = -sn
        drot[ix, 1, 3 * ix + 1] = cs
        drot[ix, 2, 3 * ix + 2] = 1.0
        drot[:, 0, :] += ry[:, None] * self.M
        drot[:, 1, :] -= rx[:, None] * self.M
        # rows per stage: [r - lb, ub - r] for x_c, y_c, theta
        rect_c = np.empty((N, 6))
        rect_c[:, 0::2] = rot - self.rect_lb
        rect_c[:, 1::2] = self.rect_ub - rot
        rect_J = np.empty((N, 6, n))
        rect_J[:, 0::2] = drot
        rect_J[:, 1::2] = -drot
        c[: 6 * N] = rect_c.ravel()
        Jc[: 6 * N] = rect_J.reshape(6 * N, n)

        pos = self.positions(z)
        delta = pos[1:] - pos[:-1]
        d2 = np.sum(delta * delta, axis=1)
        dd2 = 2.0 * np.einsum("li,lin->ln", delta, self.GD)
        r0 = 6 * N
        c[r0 : r0 + N] = d2 - self.spec.delta_min**2
        Jc[r0 : r0 + N] = dd2
        c[r0 + N : r0 + 2 * N] = self.spec.delta_max**2 - d2
        Jc[r0 + N : r0 + 2 * N] = -dd2
        r0 += 2 * N

        keep = 1.0 - self.spec.gamma
        for j in range(len(self.obs_r2)):
            rel = pos - self.obs_pos[j]
            b = np.sum(rel * rel, axis=1) - self.obs_r2[j]
            db = 2.0 * np.einsum("li,lin->ln", rel, self.Gp)
            c[r0 : r0 + N] = b[1:] - keep * b[:-1]
            Jc[r0 : r0 + N] = db[1:] - keep * db[:-1]
            r0 += N

        vi = 3 * N + ix
        c[r0 : r0 + N] = V
        Jc[r0 + ix, vi] = 1.0
        c[r0 + N : r0 + 2 * N] = self.spec.v_max - V
        Jc[r0 + N + ix, vi] = -1.0
        r0 += 2 * N
        c[r0] = self.path.domain_end - self.thetas(z)[-1]
        Jc[r0] = -self.L[-1]
        return c, Jc

    def constraint_curvature(self, z, lam) -> np.ndarray:
        """``sum_i lam_i * Hess(c_i)`` for the rectangle, distance and barrier rows."""
        lam = np.asarray(lam)
        N = self.N
        lq = lam[self._quad_start : self._quad_start + len(self._quad_hess)]
        H = np.tensordot(lq, self._quad_hess, axes=1)

        U, _ = self.split(z)
        lr = lam[: 6 * N].reshape(N, 6)
        wx = lr[:, 0] - lr[:, 1]
        wy = lr[:, 2] - lr[:, 3]
        if not (np.any(wx) or np.any(wy)):
            return H
        psi = self.x_init.theta + self.M @ np.asarray(z, dtype=float)
        cs, sn = np.cos(psi), np.sin(psi)
        rx = cs * U[:, 0] + sn * U[:, 1]
        ry = -sn * U[:, 0] + cs * U[:, 1]
        for l in np.flatnonzero((wx != 0) | (wy != 0)):
            # Hessian of w_x*r_x + w_y*r_y in (ux, uy, psi)
            a = -wx[l] * sn[l] - wy[l] * cs[l]
            b = wx[l] * cs[l] - wy[l] * sn[l]
            cpp = -wx[l] * rx[l] - wy[l] * ry[l]
            T = np.zeros((3, self.n))
            T[0, 3 * l] = 1.0
            T[1, 3 * l + 1] = 1.0
            T[2] = self.M[l]
            Hl = np.array([[0.0, 0.0, a], [0.0, 0.0, b], [a, b, cpp]])
            H += T.T @ Hl @ T
        return H

    def violation(self, z) -> float:
        c, _ = self.eval_constraints(z)
        return float(max(0.0, -np.min(c)))


def build(spec: OcpSpec, x_init: LipState, theta_init: float, path: Path, stance_parity: str) -> Nlp:
    return Nlp(spec, x_init, theta_init, path, stance_parity)


def eval_cost(nlp: Nlp, z):
    return nlp.eval_cost(z)


def eval_constraints(nlp: Nlp, z):
    return nlp.eval_constraints(z)


def rotate_input(phi: float, u) -> np.ndarray:
    """``Rot(phi)^T u`` for the input triple (planar rotation plus identity)."""
    c, s = np.cos(phi), np.sin(phi)
    ux, uy, ut = u
    return np.array([c * ux + s * uy, -s * ux + c * uy, ut])
