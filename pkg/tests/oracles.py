"""Independent brute-force oracle for one-stage programs."""

import functools
import math

import numpy as np

from footstep_mpcc.error_frames import ErrorWeights, frame_matrix
from footstep_mpcc.lip_model import LipState
from footstep_mpcc.obstacle_field import Obstacle
from footstep_mpcc.ocp_builder import OcpSpec, build
from footstep_mpcc.path_geometry import ArcPath, LinePath, slope


def grid_oracle(spec, x0, theta0, path, stance, shape=(50, 50, 21, 31)):
    """Best feasible objective over a grid of (rect x, rect y, utheta, v) and its local slack.

    The grid lives in the rectangle's own frame, so every point meets the
    rectangle bounds exactly; the world input is ``Rot(theta0 + utheta) r``.
    Returns ``(best, slack, argbest)``; ``best`` is ``inf`` if no point is feasible.
    """
    assert spec.horizon == 1
    lb, ub = spec.rectangle(stance)
    rx = np.linspace(lb[0], ub[0], shape[0])
    ry = np.linspace(lb[1], ub[1], shape[1])
    ut = np.linspace(lb[2], ub[2], shape[2])
    v = np.linspace(0.0, spec.v_max, shape[3])
    RX, RY, UT = np.meshgrid(rx, ry, ut, indexing="ij")
    psi = x0.theta + UT
    c, s = np.cos(psi), np.sin(psi)
    ux = c * RX - s * RY
    uy = s * RX + c * RY

    w, T = spec.lip.omega, spec.lip.step_duration
    sig, sh = np.cosh(w * T), np.sinh(w * T)
    px = x0.x + sh / w * x0.xdot + (sig - 1) * ux
    py = x0.y + sh / w * x0.ydot + (sig - 1) * uy

    R = np.asarray(spec.input_weight)
    f_u = R[0] * ux**2 + R[1] * uy**2 + R[2] * UT**2

    run_w, term_w = spec.weights.running_diag(), spec.weights.terminal_diag()
    cart = spec.weights.mode == "cartesian"

    def weighted(ex, ey, phi, diag):
        if cart:
            return diag[0] * (ex**2 + ey**2)
        P = frame_matrix(phi)
        a = P[0, 0] * ex + P[0, 1] * ey
        b = P[1, 0] * ex + P[1, 1] * ey
        return diag[0] * a**2 + diag[1] * b**2

    d0 = np.array([x0.x, x0.y]) - path(theta0)
    f0 = weighted(d0[0], d0[1], slope(path, theta0), run_w)

    dist2 = (px - x0.x) ** 2 + (py - x0.y) ** 2
    ok_u = (dist2 >= spec.delta_min**2) & (dist2 <= spec.delta_max**2)
    for o in spec.obstacles:
        p0, p1 = o.predict(0, T), o.predict(1, T)
        b0 = (x0.x - p0[0]) ** 2 + (x0.y - p0[1]) ** 2 - o.effective_radius**2
        b1 = (px - p1[0]) ** 2 + (py - p1[1]) ** 2 - o.effective_radius**2
        ok_u &= b1 >= (1 - spec.gamma) * b0

    F = np.full(RX.shape + (len(v),), np.inf)
    for l, vl in enumerate(v):
        th = theta0 + vl
        if th > path.domain_end:
            continue
        ref = path(th)
        fe = weighted(px - ref[0], py - ref[1], slope(path, th), term_w)
        F[..., l] = np.where(ok_u, f0 + f_u - spec.progress_weight * vl**2 + fe, np.inf)

    idx = np.unravel_index(int(np.argmin(F)), F.shape)
    best = float(F[idx])
    if not np.isfinite(best):
        return best, 0.0, idx
    slack = 0.0
    for ax in range(4):
        for d in (-1, 1):
            j = list(idx)
            j[ax] += d
            if 0 <= j[ax] < F.shape[ax] and np.isfinite(F[tuple(j)]):
                slack = max(slack, abs(float(F[tuple(j)]) - best))
    return best, slack, idx


def random_instance(rng):
    if rng.random() < 0.5:
        ang = rng.uniform(-math.pi, math.pi)
        start = rng.uniform(-1, 1, 2)
        path = LinePath(start, start + 6 * np.array([math.cos(ang), math.sin(ang)]))
    else:
        path = ArcPath(rng.uniform(-1, 1, 2), rng.uniform(1.5, 4.0), rng.uniform(-3, 3), rng.choice([-1, 1]) * 3.0)
    th0 = rng.uniform(0.2, 1.0)
    phi = slope(path, th0)
    p = path(th0) + rng.normal(scale=0.08, size=2)
    x0 = LipState(p[0], rng.normal(scale=0.2), p[1], rng.normal(scale=0.2), phi + rng.normal(scale=0.1))
    if rng.random() < 0.5:
        w = ErrorWeights.cartesian(rng.uniform(50, 300), rng.uniform(50, 300))
    else:
        w = ErrorWeights.contouring(rng.uniform(1, 300, 2), rng.uniform(1, 300, 2))
    obstacles = ()
    if rng.random() < 0.4:
        q = path(th0 + rng.uniform(0.5, 1.0)) + rng.normal(scale=0.1, size=2)
        obstacles = (Obstacle(0.2, tuple(q), tuple(rng.normal(scale=0.2, size=2))),)
    spec = OcpSpec(horizon=1, weights=w, progress_weight=rng.uniform(5, 50), obstacles=obstacles)
    return spec, x0, th0, path, str(rng.choice(["left", "right"]))


@functools.lru_cache(maxsize=None)
def dominance_instances(n=20, seed=2024):
    """``(nlp, bar)`` pairs: a one-stage program and the grid best plus its slack."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        spec, x0, th0, path, stance = random_instance(rng)
        best, slack, _ = grid_oracle(spec, x0, th0, path, stance)
        out.append((build(spec, x0, th0, path, stance), best + slack + 1e-9))
    return tuple(out)
