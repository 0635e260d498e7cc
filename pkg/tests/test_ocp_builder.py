import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from footstep_mpcc import lip_model, ocp_builder, scenario
from footstep_mpcc.error_frames import ErrorWeights
from footstep_mpcc.lip_model import LipInput, LipState
from footstep_mpcc.obstacle_field import Obstacle
from footstep_mpcc.ocp_builder import OcpSpec, build, rotate_input
from footstep_mpcc.path_geometry import ArcPath, LinePath, SplinePath, project

from conftest import fd_grad, random_z, rel_err

CIRCLE = ArcPath((0, 0), 2.0, 0.0, 2 * math.pi)


def nlp_for(name, rng=None):
    sc = scenario.shipped(name)
    x0 = sc.initial_state
    if rng is not None:
        x0 = LipState.from_array(x0.as_array() + rng.normal(scale=[0.05, 0.1, 0.05, 0.1, 0.05]))
    th = project(sc.path, (x0.x, x0.y))
    return build(sc.ocp_spec(), x0, th, sc.path, sc.initial_stance)


def test_dimensions():
    spec = OcpSpec(obstacles=(Obstacle(0.2, (3, 0)), Obstacle(0.2, (5, 1))))
    nlp = build(spec, LipState(), 0.0, LinePath((0, 0), (10, 0)), "right")
    assert nlp.n == 20
    assert nlp.m == 5 * (6 + 2 + 2) + 2 * 5 + 1
    assert nlp.tags.count(ocp_builder.CBF) == 10


def test_spec_validation():
    for bad in (dict(horizon=0), dict(v_max=0.0), dict(delta_min=0.5, delta_max=0.5),
                dict(rect_lb=(0, 0.5, 0), rect_ub=(1, 0.4, 1)), dict(gamma=1.0), dict(input_weight=(1, 1))):
        with pytest.raises(ValueError):
            OcpSpec(**bad)
    with pytest.raises(ValueError):
        build(OcpSpec(), LipState(), 11.0, LinePath((0, 0), (10, 0)), "right")


def test_rotation_structure():
    u = np.array([0.3, 0.1, 0.2])
    r = rotate_input(math.pi / 2, u)
    assert np.allclose(r, [0.1, -0.3, 0.2])
    assert np.linalg.norm(r[:2]) == pytest.approx(np.linalg.norm(u[:2]))


def test_left_rectangle_is_mirrored():
    spec = OcpSpec()
    lb, ub = spec.rectangle("left")
    assert np.allclose(lb, [-0.25, -0.4, -0.3]) and np.allclose(ub, [0.6, -0.1, 0.3])
    with pytest.raises(ValueError):
        spec.rectangle("middle")


def test_stance_alternates_across_stages():
    nlp = build(OcpSpec(), LipState(), 0.0, LinePath((0, 0), (10, 0)), "left")
    assert nlp.feet == ["left", "right", "left", "right", "left"]


def test_zero_guess_rollout():
    x0 = LipState(0.1, 0.3, -0.2, 0.1, 0.4)
    nlp = build(OcpSpec(), x0, 1.5, LinePath((0, 0), (10, 0)), "right")
    z = nlp.zero_guess()
    s = x0
    for l, row in enumerate(nlp.states(z)):
        assert np.allclose(row, s.as_array(), atol=1e-12)
        s = lip_model.step(s, LipInput(), nlp.spec.lip)
    assert np.all(nlp.thetas(z) == 1.5)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_condensation_exact(seed):
    rng = np.random.default_rng(seed)
    x0 = LipState(*rng.normal(size=5))
    nlp = build(OcpSpec(horizon=int(rng.integers(1, 8))), x0, 0.0, LinePath((0, 0), (10, 0)), "right")
    z = random_z(nlp, rng)
    U, V = nlp.split(z)
    s = x0
    for l in range(nlp.N):
        s = lip_model.step(s, LipInput(*U[l]), nlp.spec.lip)
        assert np.allclose(nlp.states(z)[l + 1], s.as_array(), atol=1e-12)
    th = nlp.thetas(z)
    assert np.all(np.diff(th) >= 0)  # v >= 0 implies monotone progress


def test_on_path_zero_cost():
    nlp = build(OcpSpec(), LipState(2, 0, 0, 0, 0), 2.0, LinePath((0, 0), (10, 0)), "right")
    f, g = nlp.eval_cost(nlp.zero_guess())
    assert f == 0.0


def test_progress_term_arithmetic():
    spec = OcpSpec(progress_weight=7.0)
    nlp = build(spec, LipState(1, 0, 0, 0, 0), 1.0, LinePath((0, 0), (10, 0)), "right")
    z = nlp.zero_guess()
    # raising the last v also shifts the terminal error; account for that separately
    z2 = z.copy()
    z2[-1] = 0.1
    f1, _ = nlp.eval_cost(z)
    f2, _ = nlp.eval_cost(z2)
    err = nlp.err_w[-1] @ (nlp.errors(z2)[-1] ** 2) - nlp.err_w[-1] @ (nlp.errors(z)[-1] ** 2)
    assert f2 - f1 == pytest.approx(err - 7.0 * (2 * 0.0 * 0.1 + 0.1**2), abs=1e-12)


def test_rectangle_and_distance_residuals():
    spec = OcpSpec(horizon=1)
    nlp = build(spec, LipState(), 0.0, LinePath((0, 0), (10, 0)), "right")
    z = np.array([0.2, 0.25, 0.0, 0.1])
    c, _ = nlp.eval_constraints(z)
    assert np.all(c[:6] > 0)
    # from rest the COM displacement is linear in u, so scaling u hits delta_max exactly
    x1 = nlp.positions(z)[1] - nlp.positions(z)[0]
    scale = spec.delta_max / np.linalg.norm(x1)
    z[:2] *= scale
    c, _ = nlp.eval_constraints(z)
    assert c[7] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("name", scenario.SHIPPED)
def test_gradient_and_jacobian_fd(name):
    rng = np.random.default_rng(scenario.SHIPPED.index(name))
    nlp = nlp_for(name, rng)
    for _ in range(20):
        z = random_z(nlp, rng)
        _, g = nlp.eval_cost(z)
        assert rel_err(g, fd_grad(lambda w: nlp.eval_cost(w)[0], z)) <= 1e-5
        _, J = nlp.eval_constraints(z)
        assert rel_err(J, fd_grad(lambda w: nlp.eval_constraints(w)[0], z)) <= 1e-5


@pytest.mark.parametrize("path", [CIRCLE, SplinePath([(0, 0), (1, 1), (2, 0), (4, 1)])], ids=["arc", "spline"])
@pytest.mark.parametrize("mode", ["contouring", "cartesian"])
def test_exact_hessian_fd(path, mode):
    w = ErrorWeights.contouring((300, 3), (30, 5)) if mode == "contouring" else ErrorWeights.cartesian(200, 100)
    spec = OcpSpec(weights=w, obstacles=(Obstacle(0.25, (1.0, 1.0), (0.1, 0)),))
    rng = np.random.default_rng(5)
    px, py = path(0.3) + 0.05
    x0 = LipState(px, 0.2, py, 0.1, 0.5)
    nlp = build(spec, x0, 0.3, path, "right")
    for _ in range(5):
        z = random_z(nlp, rng)
        _, _, H = nlp.eval_cost(z, hessian=True)
        Hfd = fd_grad(lambda v: nlp.eval_cost(v)[1], z, h=1e-5)
        assert rel_err(H, 0.5 * (Hfd + Hfd.T)) <= 1e-6
        lam = rng.uniform(0, 2, nlp.m)
        Hc = nlp.constraint_curvature(z, lam)
        Cfd = fd_grad(lambda v: nlp.eval_constraints(v)[1].T @ lam, z, h=1e-5)
        rows = ~nlp.linear_rows
        assert rows.sum() == 6 * nlp.N + 2 * nlp.N + nlp.N
        assert rel_err(Hc, 0.5 * (Cfd + Cfd.T)) <= 1e-6


def test_mode_equivalence():
    rng = np.random.default_rng(8)
    for path in (CIRCLE, LinePath((0, 0), (8, 3))):
        a = ErrorWeights.contouring((40.0, 40.0), (90.0, 90.0))
        b = ErrorWeights.cartesian(40.0, 90.0)
        x0 = LipState(path(0.5)[0] + 0.1, 0.2, path(0.5)[1] - 0.1, 0.0, 0.3)
        na = build(OcpSpec(weights=a), x0, 0.5, path, "right")
        nb = build(OcpSpec(weights=b), x0, 0.5, path, "right")
        for _ in range(50):
            z = random_z(na, rng)
            fa, ga = na.eval_cost(z)
            fb, gb = nb.eval_cost(z)
            assert abs(fa - fb) <= 1e-10 * max(1.0, abs(fb))
            assert np.allclose(ga, gb, rtol=1e-9, atol=1e-9)


def test_module_level_wrappers():
    nlp = nlp_for("circle_tracking")
    z = random_z(nlp, np.random.default_rng(0))
    assert ocp_builder.eval_cost(nlp, z)[0] == nlp.eval_cost(z)[0]
    assert np.array_equal(ocp_builder.eval_constraints(nlp, z)[0], nlp.eval_constraints(z)[0])
    assert nlp.violation(z) >= 0.0
