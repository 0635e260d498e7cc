"""Receding-horizon closed loop with the LIP as the plant."""

from __future__ import annotations

import csv
import logging
import math
from collections import Counter
from dataclasses import asdict, dataclass, field

import numpy as np

from . import lip_model, nlp_solver, ocp_builder
from .error_frames import contour_lag_error
from .lip_model import LipInput, LipState
from .obstacle_field import Obstacle, barrier
from .path_geometry import project

log = logging.getLogger(__name__)

COMPLETED = "completed"
MAX_STEPS = "max_steps"
FAILED = "failed"


@dataclass(frozen=True)
class DisturbanceModel:
    """Random force pulses, independent per axis."""

    force_range: tuple[float, float] = (-50.0, 50.0)
    duration: float = 0.1
    max_gap: float = 2.0
    mass: float = 48.0
    seed: int = 0

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("disturbance.duration must be positive")
        if not self.max_gap >= self.duration:
            raise ValueError("disturbance.max_gap must be at least the pulse duration")
        if self.force_range[0] > self.force_range[1]:
            raise ValueError("disturbance.force_range must be ordered")
        if not self.mass > 0:
            raise ValueError("disturbance.mass must be positive")

    def schedule(self, horizon_time: float, step_duration: float) -> dict[int, np.ndarray]:
        """Velocity impulse per step index, applied at the start of that step.

        A pulse starting inside step ``k`` is delivered at the boundary that
        closes it, i.e. at the start of step ``k + 1``.
        """
        rng = np.random.default_rng(self.seed)
        lo, hi = self.force_range
        out: dict[int, np.ndarray] = {}
        t = rng.uniform(0.0, self.max_gap)
        while t < horizon_time:
            force = rng.uniform(lo, hi, size=2)
            k = int(math.floor(t / step_duration)) + 1
            dv = np.array([lip_model.force_to_impulse(f, self.duration, self.mass) for f in force])
            out[k] = out.get(k, np.zeros(2)) + dv
            t += rng.uniform(self.duration, self.max_gap)
        return out


@dataclass
class StepLog:
    step: int
    time: float
    state: LipState
    applied_input: LipInput
    path_param: float
    v_applied: float
    v_avg: float
    e_contour: float
    e_lag: float
    e_cartesian: float
    barrier: list = field(default_factory=list)
    clearance: list = field(default_factory=list)
    solver_status: str = ""
    solver_iterations: int = 0
    kkt_residual: float = 0.0
    solve_time: float = 0.0
    impulse: tuple[float, float] = (0.0, 0.0)
    # diagnostics kept out of the CSV
    plan: np.ndarray | None = field(default=None, repr=False)
    cbf_active: bool = False
    obstacle_positions: list = field(default_factory=list, repr=False)


@dataclass
class RunReport:
    status: str
    logs: list[StepLog]
    summary: dict
    final_state: LipState
    footsteps: list = field(default_factory=list)


def _obstacle_params(obstacles, path):
    return [project(path, o.position) for o in obstacles]


def run(scenario, solver_config: nlp_solver.SolverConfig | None = None, warm: bool = True) -> RunReport:
    """Drive the plant with the MPC until the path is consumed or the run stops.

    ``warm=False`` starts every solve from :func:`nominal_guess` instead of
    the shifted previous plan (used to measure what warm starting buys).
    """
    spec = scenario.ocp_spec()
    path = scenario.path
    params = scenario.lip
    T = params.step_duration
    cfg = solver_config or scenario.solver
    state = scenario.initial_state
    stance = scenario.initial_stance
    obstacles: list[Obstacle] = list(scenario.obstacles)
    impulses = (
        scenario.disturbance.schedule(scenario.max_steps * T, T)
        if scenario.disturbance is not None
        else {}
    )
    eps_goal = scenario.goal_tolerance * path.domain_end
    guess = nominal_guess(spec)
    logs: list[StepLog] = []
    footsteps = []
    obstacle_params_hist = []
    status = MAX_STEPS
    prev_th = None
    span = scenario.projection_window

    def window(center):
        if center is None or span is None:
            return None
        return (center - span, center + span)

    for k in range(scenario.max_steps + 1):
        dv = impulses.get(k, np.zeros(2))
        if np.any(dv):
            state = lip_model.apply_impulse(state, float(dv[0]), float(dv[1]))
        xy = lip_model.output(state)
        th = project(path, xy, bounds=window(prev_th))
        ec, el = contour_lag_error(xy, path, th)
        e_cart = float(np.hypot(*(np.asarray(xy) - path(th))))
        prev_th = th
        if th >= path.domain_end - eps_goal and e_cart <= scenario.goal_xy_tolerance:
            status = COMPLETED
            break
        if k == scenario.max_steps:
            break

        nlp = ocp_builder.build(spec.with_obstacles(obstacles), state, th, path, stance)
        if k == 0 and obstacles:
            # seed the first solve with the obstacle-free plan: from rest the
            # barrier otherwise pulls the solver into the v = 0 branch
            free = ocp_builder.build(spec.with_obstacles(()), state, th, path, stance)
            seed = nlp_solver.solve(free, guess, cfg)
            guess = seed.z
        res = nlp_solver.solve(nlp, guess, cfg)
        if k == 0 and obstacles:
            res.solve_time += seed.solve_time
            res.iterations += seed.iterations
        if not res.usable:
            log.info("step %d: solver %s, retrying from cold start", k, res.status)
            retry = nlp_solver.solve(nlp, cold_start(spec), cfg)
            retry.solve_time += res.solve_time
            retry.iterations += res.iterations
            if retry.usable:
                res = retry
            else:
                status = FAILED
                break
        U, V = nlp.split(res.z)
        u = LipInput(*U[0])
        logs.append(_record(k, T, state, u, th, res, ec, el, e_cart, obstacles, dv, V, nlp))
        obstacle_params_hist.append(_obstacle_params(obstacles, path))
        foot = np.array(xy) - np.array([u.ux, u.uy])
        footsteps.append((stance, float(foot[0]), float(foot[1]), state.theta + u.utheta))

        state = lip_model.step(state, u, params)
        obstacles = [o.advanced(T) for o in obstacles]
        stance = ocp_builder.other_foot(stance)
        guess = nlp_solver.warm_start(res, spec) if warm else nominal_guess(spec)
        nxt = lip_model.output(state)
        if any(barrier(nxt, o.position, o.effective_radius) < 0 for o in obstacles):
            log.info("step %d: collision", k)
            status = FAILED
            break

    report = RunReport(status, logs, {}, state, footsteps)
    if logs:
        report.summary = summarize(logs, scenario, status=status, obstacle_params=obstacle_params_hist)
    else:
        report.summary = {"name": scenario.name, "status": status, "steps": 0,
                          "steps_to_complete": 0 if status == COMPLETED else None}
    return report


def nominal_guess(spec) -> np.ndarray:
    """Zero inputs with mid-range progress: ``v = 0`` is a stationary point of the reward."""
    N = spec.horizon
    return np.concatenate([np.zeros(3 * N), np.full(N, 0.5 * spec.v_max)])


def cold_start(spec) -> np.ndarray:
    return np.zeros(4 * spec.horizon)


def _record(k, T, state, u, th, res, ec, el, e_cart, obstacles, dv, V, nlp):
    xy = lip_model.output(state)
    b = [barrier(xy, o.position, o.effective_radius) for o in obstacles]
    clr = [float(np.hypot(xy[0] - o.position[0], xy[1] - o.position[1])) for o in obstacles]
    return StepLog(
        step=k,
        time=k * T,
        state=state,
        applied_input=u,
        path_param=float(th),
        v_applied=float(V[0]),
        v_avg=float(np.mean(V)),
        e_contour=ec,
        e_lag=el,
        e_cartesian=e_cart,
        barrier=b,
        clearance=clr,
        solver_status=res.status,
        solver_iterations=res.iterations,
        kkt_residual=float(res.kkt_residual),
        solve_time=res.solve_time,
        impulse=(float(dv[0]), float(dv[1])),
        plan=nlp.positions(res.z),
        cbf_active=_cbf_active(nlp, res.z),
        obstacle_positions=[o.position for o in obstacles],
    )


def _cbf_active(nlp, z, tol=1e-6) -> bool:
    c, _ = nlp.eval_constraints(z)
    rows = np.array([t == ocp_builder.CBF for t in nlp.tags])
    return bool(np.any(c[rows] <= tol)) if rows.any() else False


def overtake_flag(robot_params, obstacle_params) -> bool:
    """Robot starts behind an obstacle and is ahead of it from some step onwards."""
    if not robot_params or not obstacle_params or not obstacle_params[0]:
        return False
    r = np.asarray(robot_params)
    o = np.asarray(obstacle_params)
    flags = []
    for j in range(o.shape[1]):
        ahead = r > o[:, j]
        if ahead[0]:
            flags.append(False)
            continue
        behind = np.flatnonzero(~ahead)
        last_behind = behind[-1]
        flags.append(bool(last_behind < len(ahead) - 1))
    return any(flags)


def cbf_audit(logs, gamma: float, tol: float = 1e-8) -> int:
    """Number of logged steps breaking ``b_k >= (1 - gamma)^k b_0``."""
    if not logs or not logs[0].barrier:
        return 0
    b = np.array([lg.barrier for lg in logs])
    k = np.arange(len(b))[:, None]
    bound = (1.0 - gamma) ** k * b[0]
    return int(np.sum(b < bound - tol * (1.0 + np.abs(bound))))


def summarize(logs, scenario=None, status=None, obstacle_params=None) -> dict:
    if not logs:
        raise ValueError("summarize needs at least one step log")
    ec = np.abs([lg.e_contour for lg in logs])
    cart = np.array([lg.e_cartesian for lg in logs])
    vavg = np.array([lg.v_avg for lg in logs])
    times = np.array([lg.solve_time for lg in logs])
    iters = np.array([lg.solver_iterations for lg in logs])
    clearances = [c for lg in logs for c in lg.clearance]
    robot_params = [lg.path_param for lg in logs]
    out = {
        "status": status,
        "steps_to_complete": len(logs) if status == COMPLETED else None,
        "steps": len(logs),
        "max_abs_e_contour": float(np.max(ec)),
        "mean_abs_e_contour": float(np.mean(ec)),
        "max_abs_e_lag": float(np.max(np.abs([lg.e_lag for lg in logs]))),
        "max_e_cartesian": float(np.max(cart)),
        "min_clearance": float(min(clearances)) if clearances else None,
        "overtake": overtake_flag(robot_params, obstacle_params) if obstacle_params else False,
        "mean_v_avg": float(np.mean(vavg)),
        "mean_solve_time": float(np.mean(times)),
        "max_solve_time": float(np.max(times)),
        "mean_iterations": float(np.mean(iters)),
        "solver_statuses": dict(Counter(lg.solver_status for lg in logs)),
    }
    if scenario is not None:
        out["name"] = scenario.name
        out["cbf_violations"] = cbf_audit(logs, scenario.gamma)
    return out


def csv_header(n_obstacles: int) -> list[str]:
    obs = [f"{kind}_{j}" for j in range(n_obstacles) for kind in ("barrier", "clearance")]
    return (
        ["step", "time", "x", "xdot", "y", "ydot", "theta", "ux", "uy", "utheta"]
        + ["theta_init", "v", "v_avg", "e_contour", "e_lag", "e_cartesian"]
        + obs
        + ["solver_status", "solver_iterations", "kkt_residual", "solve_time", "impulse_x", "impulse_y"]
    )


def _row(lg: StepLog) -> list:
    s, u = lg.state, lg.applied_input
    obs = [val for b, c in zip(lg.barrier, lg.clearance) for val in (b, c)]
    return (
        [lg.step, lg.time, s.x, s.xdot, s.y, s.ydot, s.theta, u.ux, u.uy, u.utheta]
        + [lg.path_param, lg.v_applied, lg.v_avg, lg.e_contour, lg.e_lag, lg.e_cartesian]
        + obs
        + [lg.solver_status, lg.solver_iterations, lg.kkt_residual, lg.solve_time, *lg.impulse]
    )


def write_csv(logs, fh) -> None:
    """Write step logs to an open text file; floats use ``repr`` so they round-trip."""
    n_obs = len(logs[0].barrier) if logs else 0
    w = csv.writer(fh)
    w.writerow(csv_header(n_obs))
    for lg in logs:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in _row(lg)])


def read_csv(fh) -> list[StepLog]:
    rows = list(csv.reader(fh))
    if not rows:
        return []
    header = rows[0]
    n_obs = sum(1 for h in header if h.startswith("barrier_"))
    if header != csv_header(n_obs):
        raise ValueError("unexpected step log header")
    out = []
    for r in rows[1:]:
        f = [float(v) for v in r[1:16]]
        obs = [float(v) for v in r[16 : 16 + 2 * n_obs]]
        tail = r[16 + 2 * n_obs :]
        out.append(
            StepLog(
                step=int(r[0]),
                time=f[0],
                state=LipState(*f[1:6]),
                applied_input=LipInput(*f[6:9]),
                path_param=f[9],
                v_applied=f[10],
                v_avg=f[11],
                e_contour=f[12],
                e_lag=f[13],
                e_cartesian=f[14],
                barrier=obs[0::2],
                clearance=obs[1::2],
                solver_status=tail[0],
                solver_iterations=int(tail[1]),
                kkt_residual=float(tail[2]),
                solve_time=float(tail[3]),
                impulse=(float(tail[4]), float(tail[5])),
            )
        )
    return out


def run_to_dict(report: RunReport) -> dict:
    return {"status": report.status, "summary": report.summary, "final_state": asdict(report.final_state)}
