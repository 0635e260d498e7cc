"""Command-line front end: ``run``, ``sweep`` and ``plot``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path as FsPath

import numpy as np

from . import closed_loop_sim, scenario as scn
from .svgplot import line_chart, trajectory_chart

OUT_ENV = "FOOTSTEP_MPCC_OUT"
log = logging.getLogger("footstep_mpcc.cli")


def default_out_root() -> FsPath:
    return FsPath(os.environ.get(OUT_ENV, "runs"))


def resolve_scenario(ref: str) -> scn.Scenario:
    """A scenario file path, or the name of a shipped scenario."""
    p = FsPath(ref)
    if p.is_file():
        return scn.load(p)
    name = p.stem if p.suffix == ".yaml" else ref
    if name in scn.SHIPPED:
        return scn.shipped(name)
    raise FileNotFoundError(f"no scenario file {ref!r} and no shipped scenario of that name")


def write_run(report, scenario: scn.Scenario, out: FsPath) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "scenario.yaml").write_text(scn.dump_scenario(scenario), encoding="utf-8")
    with open(out / "steps.csv", "w", newline="", encoding="utf-8") as fh:
        closed_loop_sim.write_csv(report.logs, fh)
    with open(out / "footsteps.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["foot", "x", "y", "heading"])
        for f in report.footsteps:
            w.writerow([f[0], repr(f[1]), repr(f[2]), repr(float(f[3]))])
    summary = dict(report.summary)
    summary["status"] = report.status
    (out / "summary.json").write_text(json.dumps(summary, indent=2, default=_json_default) + "\n", encoding="utf-8")
    write_plots(out)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_plots(run_dir: FsPath) -> list[FsPath]:
    """(Re)draw the three SVGs of a run directory from its files."""
    steps_file = run_dir / "steps.csv"
    if not steps_file.is_file():
        raise FileNotFoundError(f"{run_dir} holds no steps.csv")
    with open(steps_file, newline="", encoding="utf-8") as fh:
        logs = closed_loop_sim.read_csv(fh)
    if not logs:
        raise ValueError(f"{steps_file} has no step records")
    scenario = scn.load(run_dir / "scenario.yaml")
    feet = []
    fs = run_dir / "footsteps.csv"
    if fs.is_file():
        with open(fs, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))[1:]
        feet = [(r[0], float(r[1]), float(r[2]), float(r[3])) for r in rows]

    k = np.array([lg.step for lg in logs], dtype=float)
    path = scenario.path
    ts = np.linspace(0.0, path.domain_end, 400)
    com = np.array([[lg.state.x, lg.state.y] for lg in logs])
    T = scenario.lip.step_duration
    last = len(logs)
    obstacles = [(*o.predict(last, T), o.effective_radius) for o in scenario.obstacles]
    obstacles += [(*o.position, o.effective_radius) for o in scenario.obstacles]

    files = {
        "trajectory.svg": trajectory_chart(path(ts), com, feet, obstacles, title=f"{scenario.name}: path and COM"),
        "errors.svg": line_chart(
            k,
            [
                ("contouring error [m]", [lg.e_contour for lg in logs]),
                ("lag error [m]", [lg.e_lag for lg in logs]),
                ("Cartesian error norm [m]", [lg.e_cartesian for lg in logs]),
            ],
            "step",
            "error [m]",
            f"{scenario.name}: tracking errors",
        ),
        "progress.svg": line_chart(
            k,
            [("v_avg", [lg.v_avg for lg in logs])],
            "step",
            "path units per step",
            f"{scenario.name}: average path update",
            hlines=[("v_max", scenario.v_max)],
        ),
    }
    written = []
    for name, svg in files.items():
        (run_dir / name).write_text(svg, encoding="utf-8")
        written.append(run_dir / name)
    return written


def _run_one(scenario: scn.Scenario, out: FsPath) -> dict:
    report = closed_loop_sim.run(scenario)
    write_run(report, scenario, out)
    return {"name": scenario.name, "status": report.status, "out": str(out), **report.summary}


def _sweep_job(args):
    file, out_root = args
    scenario = scn.load(file)
    return _run_one(scenario, FsPath(out_root) / scenario.name)


def cmd_run(args) -> int:
    scenario = resolve_scenario(args.scenario)
    if args.seed is not None:
        scenario = scenario.with_seed(args.seed)
    if args.out:
        out = FsPath(args.out)
    elif scenario.output_dir:
        out = FsPath(scenario.output_dir)
    else:
        out = default_out_root() / scenario.name
    res = _run_one(scenario, out)
    print(f"{res['name']}: {res['status']} after {res['steps']} steps -> {out}")
    return 0 if res["status"] == closed_loop_sim.COMPLETED else 1


def cmd_sweep(args) -> int:
    folder = FsPath(args.directory)
    files = sorted(folder.glob("*.yaml")) + sorted(folder.glob("*.yml"))
    if not files:
        print(f"no scenario files in {folder}", file=sys.stderr)
        return 2
    out_root = FsPath(args.out) if args.out else default_out_root()
    jobs = [(f, out_root) for f in files]
    if args.jobs == 1:
        results = [_sweep_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_job, jobs))
    for r in results:
        print(f"{r['name']:<24} {r['status']:<10} steps={r['steps']:<4} -> {r['out']}")
    return 0 if all(r["status"] == closed_loop_sim.COMPLETED for r in results) else 1


def cmd_plot(args) -> int:
    run_dir = FsPath(args.run_dir)
    try:
        written = write_plots(run_dir)
    except (FileNotFoundError, ValueError) as exc:
        print(f"plot: {exc}", file=sys.stderr)
        return 2
    for p in written:
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="footstep-mpcc", description="Contouring-control footstep planner on the LIP.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate one scenario")
    r.add_argument("scenario", help="scenario file, or a shipped scenario name")
    r.add_argument("--out", help=f"output directory (default ${OUT_ENV}/<name>, else runs/<name>)")
    r.add_argument("--seed", type=int, help="override the scenario seed")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run every scenario file in a directory")
    s.add_argument("directory")
    s.add_argument("--out", help="output root")
    s.add_argument("--jobs", type=int, default=None, help="worker processes (default: CPU count)")
    s.set_defaults(func=cmd_sweep)

    p = sub.add_parser("plot", help="redraw the SVGs of a run directory")
    p.add_argument("run_dir")
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (scn.ScenarioError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
