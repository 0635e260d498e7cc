import functools
import time

import numpy as np

from footstep_mpcc import closed_loop_sim, scenario


def rk4_lip(x0, xd0, px, omega, T, n=4000):
    """Integrate xdd = omega^2 (x - px) over [0, T] with fixed-step RK4 (vectorized)."""
    h = T / n
    x, v = np.array(x0, float), np.array(xd0, float)
    w2 = np.asarray(omega, float) ** 2

    def f(x, v):
        return v, w2 * (x - px)

    for _ in range(n):
        k1x, k1v = f(x, v)
        k2x, k2v = f(x + 0.5 * h * k1x, v + 0.5 * h * k1v)
        k3x, k3v = f(x + 0.5 * h * k2x, v + 0.5 * h * k2v)
        k4x, k4v = f(x + h * k3x, v + h * k3v)
        x = x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
        v = v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return x, v


def fd_grad(fun, z, h=1e-6):
    z = np.asarray(z, float)
    out = []
    for i in range(len(z)):
        e = np.zeros_like(z)
        e[i] = h
        out.append((np.asarray(fun(z + e)) - np.asarray(fun(z - e))) / (2 * h))
    return np.array(out).T


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))


def random_z(nlp, rng):
    """Decision vector with inputs near the reachable envelope and v in range."""
    N = nlp.N
    U = np.column_stack([
        rng.uniform(-0.3, 0.5, N),
        rng.uniform(-0.4, 0.4, N),
        rng.uniform(-0.3, 0.3, N),
    ])
    V = rng.uniform(0.0, nlp.spec.v_max, N)
    return np.concatenate([U.ravel(), V])


RUN_SECONDS: dict[str, float] = {}
CRITERIA: dict[int, tuple[bool, str]] = {}


@functools.lru_cache(maxsize=None)
def shipped_run(name):
    t0 = time.perf_counter()
    rep = closed_loop_sim.run(scenario.shipped(name))
    RUN_SECONDS[name] = time.perf_counter() - t0
    return rep


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        ok, detail = CRITERIA[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
