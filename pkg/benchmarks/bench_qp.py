"""Compare the compiled and numpy QP backends.

    python3 benchmarks/bench_qp.py [--reps 200] [--no-loop]

Part one times isolated dense QPs at horizon-sized dimensions.  Part two
runs the shipped scenarios once per backend in a subprocess (the backend is
chosen at import, so ``FOOTSTEP_MPCC_PURE`` has to be set before it).
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from footstep_mpcc import qp

LOOP = """
import json, sys
from footstep_mpcc import closed_loop_sim, qp, scenario
out = {"backend": qp.BACKEND}
for name in scenario.SHIPPED:
    s = closed_loop_sim.run(scenario.shipped(name)).summary
    out[name] = s["mean_solve_time"]
json.dump(out, sys.stdout)
"""


def random_qp(rng, n, m):
    M = rng.normal(size=(n, n))
    G = M @ M.T + 0.1 * np.eye(n)
    C = rng.normal(size=(m, n))
    b = C @ rng.normal(size=n) - rng.uniform(0, 1, m)
    return G, rng.normal(size=n), C, b


def time_kernel(fn, problems, reps):
    t0 = time.perf_counter()
    for _ in range(reps):
        for p in problems:
            fn(*p)
    return (time.perf_counter() - t0) / (reps * len(problems))


def closed_loop(pure):
    env = dict(os.environ)
    env.pop("FOOTSTEP_MPCC_PURE", None)
    if pure:
        env["FOOTSTEP_MPCC_PURE"] = "1"
    r = subprocess.run([sys.executable, "-c", LOOP], env=env, capture_output=True, text=True, check=True)
    return json.loads(r.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--no-loop", action="store_true", help="skip the closed-loop comparison")
    args = ap.parse_args(argv)

    if qp.compiled_solve_qp is None:
        print("compiled backend not built; nothing to compare")
        return 1

    rng = np.random.default_rng(0)
    print(f"{'n':>4} {'m':>5} {'python [us]':>12} {'cython [us]':>12} {'speedup':>8}")
    for n, m in ((8, 30), (20, 60), (20, 90), (40, 180)):
        problems = [random_qp(rng, n, m) for _ in range(10)]
        tp = time_kernel(qp.python_solve_qp, problems, args.reps)
        tc = time_kernel(qp.compiled_solve_qp, problems, args.reps)
        print(f"{n:>4} {m:>5} {tp * 1e6:>12.1f} {tc * 1e6:>12.1f} {tp / tc:>8.1f}")

    if not args.no_loop:
        print("\nmean closed-loop solve time per MPC step [ms]")
        rows = [closed_loop(pure=False), closed_loop(pure=True)]
        print(f"{'scenario':<20}" + "".join(f"{r['backend']:>10}" for r in rows))
        for name in rows[0]:
            if name != "backend":
                print(f"{name:<20}" + "".join(f"{r[name] * 1e3:>10.1f}" for r in rows))
    return 0


if __name__ == "__main__":
    sys.exit(main())
