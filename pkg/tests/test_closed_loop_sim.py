import io
import math
from dataclasses import replace

import numpy as np
import pytest

from footstep_mpcc import closed_loop_sim as cls
from footstep_mpcc import lip_model, ocp_builder, scenario
from footstep_mpcc.error_frames import ErrorWeights
from footstep_mpcc.lip_model import LipState
from footstep_mpcc.obstacle_field import Obstacle
from footstep_mpcc.path_geometry import LinePath

from conftest import shipped_run

YDOT0 = -0.19101409020


def line_scenario(length=5.0, **kw):
    base = scenario.shipped("circle_tracking")
    return replace(base, name="line", path=LinePath((0, 0), (length, 0)),
                   initial_state=LipState(0, 0, 0, YDOT0, 0), max_steps=60,
                   goal_tolerance=0.05, **kw)


def test_disturbance_schedule():
    d = cls.DisturbanceModel(force_range=(-50, 50), duration=0.1, max_gap=2.0, mass=48.0, seed=3)
    sch = d.schedule(40.0, 0.4)
    again = d.schedule(40.0, 0.4)
    assert sch.keys() == again.keys() and all(np.array_equal(sch[k], again[k]) for k in sch)
    assert all(k >= 1 for k in sch)
    cap = 50 * 0.1 / 48.0
    for dv in sch.values():
        assert np.all(np.abs(dv) <= 2 * cap + 1e-12)
    # gaps never exceed max_gap, so a 40 s window holds at least 19 pulses
    assert len(sch) >= 10
    assert cls.DisturbanceModel(seed=4).schedule(40, 0.4).keys() != sch.keys()


def test_disturbance_validation():
    for bad in (dict(duration=0.0), dict(max_gap=0.05), dict(force_range=(5, -5)), dict(mass=0.0)):
        with pytest.raises(ValueError):
            cls.DisturbanceModel(**bad)


def test_deterministic_rerun():
    sc = scenario.shipped("circle_disturbed")
    a, b = cls.run(sc), cls.run(sc)
    assert a.status == b.status and len(a.logs) == len(b.logs)
    assert all(x.state == y.state and x.applied_input == y.applied_input for x, y in zip(a.logs, b.logs))


def test_zero_length_path_completes_immediately():
    sc = replace(line_scenario(), path=LinePath((0, 0), (1e-3, 0)), initial_state=LipState(1e-3, 0, 0, 0, 0))
    rep = cls.run(sc)
    assert rep.status == cls.COMPLETED and len(rep.logs) <= 1
    assert rep.summary["steps_to_complete"] <= 1


def test_parked_obstacle_never_hit():
    sc = replace(line_scenario(), weights=ErrorWeights.cartesian(200, 200), max_steps=40,
                 obstacles=(Obstacle(0.25, (2.0, 0.0)),))
    rep = cls.run(sc)
    assert rep.status != cls.FAILED
    assert min(b for lg in rep.logs for b in lg.barrier) > 0
    assert rep.summary["cbf_violations"] == 0
    assert rep.summary["min_clearance"] >= 0.25


def test_straight_line_tracking():
    rep = cls.run(line_scenario())
    assert rep.status == cls.COMPLETED
    assert max(abs(lg.e_contour) for lg in rep.logs[3:]) <= 0.05
    th = [lg.path_param for lg in rep.logs]
    assert np.all(np.diff(th) >= -1e-12)


def test_applied_inputs_respect_bounds():
    sc = scenario.shipped("circle_tracking")
    rep = shipped_run("circle_tracking")
    spec = sc.ocp_spec()
    stance = sc.initial_stance
    tol = 1e-7
    for lg in rep.logs:
        lb, ub = spec.rectangle(stance)
        u = lg.applied_input
        r = ocp_builder.rotate_input(lg.state.theta + u.utheta, np.array([u.ux, u.uy, u.utheta]))
        assert np.all(r >= np.asarray(lb) - tol) and np.all(r <= np.asarray(ub) + tol)
        nxt = lip_model.step(lg.state, u, sc.lip)
        d = math.hypot(nxt.x - lg.state.x, nxt.y - lg.state.y)
        assert spec.delta_min - tol <= d <= spec.delta_max + tol
        assert 0.0 <= lg.v_applied <= sc.v_max + tol
        stance = ocp_builder.other_foot(stance)


def test_csv_round_trip():
    rep = shipped_run("overtake_mpcc")
    buf = io.StringIO()
    cls.write_csv(rep.logs, buf)
    buf.seek(0)
    back = cls.read_csv(buf)
    assert len(back) == len(rep.logs)
    for a, b in zip(rep.logs, back):
        assert np.allclose(a.state.as_array(), b.state.as_array(), rtol=0, atol=1e-9)
        assert np.allclose(a.barrier, b.barrier, atol=1e-9)
        assert abs(a.e_contour - b.e_contour) <= 1e-9 and a.solver_status == b.solver_status
    with pytest.raises(ValueError):
        cls.read_csv(io.StringIO("a,b\n1,2\n"))


def test_overtake_flag():
    assert cls.overtake_flag([0, 1, 2, 3], [[1.5], [1.6], [1.7], [1.8]]) is True
    assert cls.overtake_flag([0, 1, 1.2], [[1.5], [1.6], [1.7]]) is False
    assert cls.overtake_flag([2, 3], [[1.5], [1.6]]) is False  # ahead from the start
    assert cls.overtake_flag([], []) is False


def test_cbf_audit_counts_breaks():
    def lg(b):
        return cls.StepLog(0, 0.0, LipState(), lip_model.LipInput(), 0, 0, 0, 0, 0, 0, barrier=[b])
    logs = [lg(1.0), lg(0.7), lg(0.49), lg(0.2)]
    # bounds 1, 0.7, 0.49, 0.343
    assert cls.cbf_audit(logs, 0.3) == 1
    assert cls.cbf_audit([], 0.3) == 0


def test_summarize():
    rep = shipped_run("circle_tracking")
    s = rep.summary
    assert s["status"] == cls.COMPLETED and s["steps_to_complete"] == len(rep.logs)
    assert s["max_abs_e_contour"] >= s["mean_abs_e_contour"] >= 0
    assert s["min_clearance"] is None and s["overtake"] is False
    with pytest.raises(ValueError):
        cls.summarize([])


def test_failed_run_reports_failure():
    # obstacle rushing head-on along the path with short steps only
    sc = replace(line_scenario(), delta_max=0.05, max_steps=20,
                 obstacles=(Obstacle(0.25, (0.6, 0.0), (-1.5, 0.0)),))
    rep = cls.run(sc)
    assert rep.status == cls.FAILED
    assert rep.summary["status"] == cls.FAILED and rep.summary["steps_to_complete"] is None
