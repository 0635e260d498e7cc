"""Dense SQP solver for the condensed contouring-control programs.

Each iteration builds a convex QP from the exact Lagrangian curvature
(cost plus quadratic and rectangle constraint rows), clips its spectrum
at a floor, and globalizes the step with an l1 merit backtracking
search.  When the
linearized constraints are inconsistent an elastic QP takes over.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import qp
from .ocp_builder import Nlp, OcpSpec

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
MAX_ITER = "max_iter"
INFEASIBLE = "infeasible_detected"
NUMERICAL_FAILURE = "numerical_failure"


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 50
    kkt_tolerance: float = 1e-6
    constraint_tolerance: float = 1e-8
    regularization: float = 1e-6
    backtrack: float = 0.5
    armijo: float = 1e-4
    penalty_init: float = 10.0
    penalty_margin: float = 1.5
    penalty_max: float = 1e8
    elastic_curvature: float = 1e-4
    min_step: float = 1e-12
    second_order_correction: bool = True
    hessian_modification: str = "clip"

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        for name in ("kkt_tolerance", "constraint_tolerance", "regularization", "penalty_init"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.hessian_modification not in ("clip", "abs"):
            raise ValueError("hessian_modification must be 'clip' or 'abs'")
        for name in ("backtrack", "armijo"):
            if not 0 < getattr(self, name) < 1:
                raise ValueError(f"{name} must lie in (0, 1)")


@dataclass
class SolveResult:
    z: np.ndarray
    status: str
    kkt_residual: float
    constraint_violation: float
    iterations: int
    solve_time: float
    objective: float
    multipliers: np.ndarray = field(repr=False)
    # (merit before, merit after) of each accepted step, at that step's penalty
    merit_history: list = field(default_factory=list, repr=False)

    @property
    def usable(self) -> bool:
        """Whether the first input may be applied to the plant."""
        return self.status == OPTIMAL or (self.status == MAX_ITER and self.constraint_violation <= 1e-6)


def _floor_spectrum(H, floor, mode="clip"):
    """Symmetric part of ``H`` with eigenvalues raised to ``floor``.

    ``abs`` mirrors negative eigenvalues instead of clipping them.
    """
    H = 0.5 * (H + H.T)
    w, V = np.linalg.eigh(H)
    if w[0] >= floor:
        return H
    w = np.maximum(np.abs(w) if mode == "abs" else w, floor)
    return (V * w) @ V.T


def _violation(c):
    return float(max(0.0, -np.min(c))) if len(c) else 0.0


def _l1(c):
    return float(np.sum(np.maximum(0.0, -c)))


def _kkt(g, Jc, c, lam):
    stat = float(np.max(np.abs(g - Jc.T @ lam)))
    comp = float(np.max(np.abs(lam * c))) if len(c) else 0.0
    return max(stat, comp) / (1.0 + float(np.max(np.abs(g))))


def _elastic_qp(H, g, Jc, c, linear, mu, eps, hint):
    """QP with nonnegative slacks on the nonlinear rows, priced at ``mu``."""
    n = len(g)
    nl = np.flatnonzero(~linear)
    k = len(nl)
    G = np.zeros((n + k, n + k))
    G[:n, :n] = H
    G[n:, n:] = eps * np.eye(k)
    a = np.concatenate([g, np.full(k, mu)])
    m = len(c)
    C = np.zeros((m + k, n + k))
    C[:m, :n] = Jc
    C[nl, n + np.arange(k)] = 1.0
    C[m:, n:] = np.eye(k)
    b = np.concatenate([-c, np.zeros(k)])
    h = None if hint is None else np.concatenate([hint, np.zeros(k, dtype=bool)])
    y, lam, status, _ = qp.solve_qp(G, a, C, b, hint=h)
    return y[:n], lam[:m], status


def solve(nlp: Nlp, z0=None, config: SolverConfig | None = None) -> SolveResult:
    """Minimize the program from ``z0`` (bound-clipped); deterministic."""
    cfg = config or SolverConfig()
    t_start = time.perf_counter()
    z = np.clip(
        np.zeros(nlp.n) if z0 is None else np.asarray(z0, dtype=float),
        nlp.lower,
        nlp.upper,
    )
    mu = cfg.penalty_init
    lam = np.zeros(nlp.m)
    hint = None
    best = None
    merits = []
    linear = nlp.linear_rows
    status = MAX_ITER
    kkt = math.inf
    stalled = 0
    f = math.nan
    c = np.zeros(nlp.m)
    it = 0

    def merit(zz, weight):
        ff, _ = nlp.eval_cost(zz)
        cc, _ = nlp.eval_constraints(zz)
        return ff + weight * _l1(cc), cc

    for it in range(1, cfg.max_iterations + 1):
        f, g, Hf = nlp.eval_cost(z, hessian=True)
        c, Jc = nlp.eval_constraints(z)
        if not (math.isfinite(f) and np.all(np.isfinite(g)) and np.all(np.isfinite(c)) and np.all(np.isfinite(Jc))):
            status = NUMERICAL_FAILURE
            break
        viol = _violation(c)
        if viol <= cfg.constraint_tolerance and (best is None or f < best[1]):
            best = (z.copy(), f, lam.copy())

        H = _floor_spectrum(Hf - nlp.constraint_curvature(z, lam), cfg.regularization, cfg.hessian_modification)
        d, lam_qp, qst, _ = qp.solve_qp(H, g, Jc, -c, hint=hint)
        elastic = False
        if qst == qp.INFEASIBLE:
            elastic = True
            mu = min(cfg.penalty_max, max(mu, 10.0 * mu if viol > cfg.constraint_tolerance else mu))
            d, lam_qp, qst = _elastic_qp(H, g, Jc, c, linear, mu, cfg.elastic_curvature, hint)
        if qst != qp.OPTIMAL:
            status = NUMERICAL_FAILURE
            break

        kkt = _kkt(g, Jc, c, lam_qp)
        if not elastic and kkt <= cfg.kkt_tolerance and viol <= cfg.constraint_tolerance:
            lam = lam_qp
            status = OPTIMAL
            break

        mu = min(cfg.penalty_max, max(mu, cfg.penalty_margin * float(np.max(lam_qp, initial=0.0))))
        viol_l1 = _l1(c)
        phi0 = f + mu * viol_l1
        D = float(g @ d) + mu * (_l1(c + Jc @ d) - viol_l1)
        if D > -cfg.min_step * (1.0 + abs(phi0)) or np.max(np.abs(d)) <= cfg.min_step:
            # no descent available from the model
            lam = lam_qp
            if viol <= cfg.constraint_tolerance:
                # stalled short of the KKT tolerance: feasible, so still usable
                status = MAX_ITER
            else:
                status = INFEASIBLE
            break

        alpha = 1.0
        trial = z + d
        phi, c_trial = merit(trial, mu)
        accepted = phi <= phi0 + cfg.armijo * D
        if not accepted and cfg.second_order_correction:
            # second-order correction against the Maratos effect
            ds, _, sst, _ = qp.solve_qp(H, g, Jc, -(c_trial - Jc @ d), hint=lam_qp > 0)
            if sst == qp.OPTIMAL:
                soc = np.clip(z + ds, nlp.lower, nlp.upper)
                phi_s, _ = merit(soc, mu)
                if phi_s <= phi0 + cfg.armijo * D:
                    trial, phi, accepted = soc, phi_s, True
        while not accepted:
            alpha *= cfg.backtrack
            if alpha < 1e-10:
                break
            trial = z + alpha * d
            phi, _ = merit(trial, mu)
            accepted = phi <= phi0 + cfg.armijo * alpha * D
        if not accepted:
            lam = lam_qp
            status = INFEASIBLE if viol > cfg.constraint_tolerance else MAX_ITER
            break

        merits.append((phi0, phi))
        if elastic:
            stalled = stalled + 1 if _violation(nlp.eval_constraints(trial)[0]) >= viol * (1 - 1e-3) else 0
            if stalled >= 5:
                z = np.clip(trial, nlp.lower, nlp.upper)
                status = INFEASIBLE
                break
        else:
            stalled = 0
        z = np.clip(trial, nlp.lower, nlp.upper)
        lam = lam_qp
        hint = lam_qp > 0
    else:
        status = MAX_ITER

    f, _ = nlp.eval_cost(z)
    c, _ = nlp.eval_constraints(z)
    viol = _violation(c)
    if status == MAX_ITER and viol > cfg.constraint_tolerance and best is not None:
        z, f, lam = best[0], best[1], best[2]
        viol = _violation(nlp.eval_constraints(z)[0])
    elif status == MAX_ITER and best is not None and best[1] < f:
        z, f, lam = best[0], best[1], best[2]
        viol = _violation(nlp.eval_constraints(z)[0])
    return SolveResult(
        z=z,
        status=status,
        kkt_residual=kkt,
        constraint_violation=viol,
        iterations=it,
        solve_time=time.perf_counter() - t_start,
        objective=float(f),
        multipliers=lam,
        merit_history=merits,
    )


def start_set(nlp: Nlp, v_levels=(0.0, 0.5, 1.0), heading_levels=(0.1, 0.5, 0.9), reach_levels=(0.3, 0.7)):
    """Deterministic initial guesses spread over the input box and progress range.

    Each guess holds every stage at the same relative spot of its own
    reachability rectangle (lateral midpoint, the given fractions of the
    sagittal and heading ranges) with ``v`` at a fraction of ``v_max``.
    """
    guesses = []
    for fv in v_levels:
        for fh in heading_levels:
            for fr in reach_levels:
                U = np.empty((nlp.N, 3))
                psi = nlp.x_init.theta
                for l in range(nlp.N):
                    lb, ub = nlp.rect_lb[l], nlp.rect_ub[l]
                    ut = lb[2] + fh * (ub[2] - lb[2])
                    psi += ut
                    rx = lb[0] + fr * (ub[0] - lb[0])
                    ry = 0.5 * (lb[1] + ub[1])
                    c, s = math.cos(psi), math.sin(psi)
                    U[l] = (c * rx - s * ry, s * rx + c * ry, ut)
                guesses.append(np.concatenate([U.ravel(), np.full(nlp.N, fv * nlp.spec.v_max)]))
    return guesses


def solve_multistart(nlp: Nlp, guesses=None, config: SolverConfig | None = None) -> SolveResult:
    """Best usable local solution over several starts (``start_set`` by default).

    The program is nonconvex (progress reward, heading rotation, barrier and
    the lower step-length bound), so a single local solve can stop in a
    worse basin.  Cost grows linearly with the number of starts; the
    closed loop uses single warm-started solves instead.
    """
    guesses = start_set(nlp) if guesses is None else list(guesses)
    if not guesses:
        raise ValueError("need at least one initial guess")
    results = [solve(nlp, g, config) for g in guesses]
    usable = [r for r in results if r.usable]
    pool = usable or results
    best = min(pool, key=lambda r: (r.objective if usable else r.constraint_violation))
    best.solve_time = sum(r.solve_time for r in results)
    best.iterations = sum(r.iterations for r in results)
    return best


def warm_start(previous: SolveResult, spec: OcpSpec) -> np.ndarray:
    """Shift the previous plan one stage forward, repeating the last stage."""
    N = spec.horizon
    z = np.asarray(previous.z, dtype=float)
    if len(z) != 4 * N:
        raise ValueError("previous solution has a different horizon")
    U = z[: 3 * N].reshape(N, 3)
    V = z[3 * N :]
    U = np.vstack([U[1:], U[-1:]])
    V = np.clip(np.concatenate([V[1:], V[-1:]]), 0.0, spec.v_max)
    return np.concatenate([U.ravel(), V])
