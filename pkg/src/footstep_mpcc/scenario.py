"""Declarative experiment description and its YAML surface syntax."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from importlib import resources

import yaml

from . import ocp_builder
from .closed_loop_sim import DisturbanceModel
from .error_frames import CARTESIAN, CONTOURING, ErrorWeights
from .lip_model import LipParams, LipState
from .nlp_solver import SolverConfig
from .obstacle_field import Obstacle
from .path_geometry import Path, path_from_dict


class ScenarioError(ValueError):
    """Parse or validation failure; the message names the offending field."""


@dataclass(frozen=True)
class Scenario:
    name: str
    path: Path
    weights: ErrorWeights
    input_weight: tuple[float, float, float]
    progress_weight: float
    horizon: int
    v_max: float
    initial_state: LipState
    max_steps: int
    lip: LipParams = field(default_factory=LipParams)
    mass: float = 48.0
    rect_lb: tuple[float, float, float] = (-0.25, 0.1, -0.3)
    rect_ub: tuple[float, float, float] = (0.6, 0.4, 0.3)
    delta_min: float = 0.02
    delta_max: float = 0.7
    gamma: float = 0.3
    obstacles: tuple[Obstacle, ...] = ()
    disturbance: DisturbanceModel | None = None
    initial_stance: str = ocp_builder.RIGHT
    seed: int = 0
    output_dir: str | None = None
    goal_tolerance: float = 0.01
    goal_xy_tolerance: float = 0.1
    projection_window: float | None = 2.0
    solver: SolverConfig = field(default_factory=SolverConfig)

    def ocp_spec(self) -> ocp_builder.OcpSpec:
        return ocp_builder.OcpSpec(
            horizon=self.horizon,
            weights=self.weights,
            input_weight=self.input_weight,
            progress_weight=self.progress_weight,
            v_max=self.v_max,
            rect_lb=self.rect_lb,
            rect_ub=self.rect_ub,
            delta_min=self.delta_min,
            delta_max=self.delta_max,
            gamma=self.gamma,
            obstacles=self.obstacles,
            lip=self.lip,
        )

    def with_seed(self, seed: int) -> "Scenario":
        dist = None if self.disturbance is None else replace(self.disturbance, seed=seed)
        return replace(self, seed=seed, disturbance=dist)

    def to_dict(self) -> dict:
        w = self.weights
        if w.mode == CARTESIAN:
            weights = {"mode": CARTESIAN, "running": w.alpha, "terminal": w.beta}
        else:
            weights = {
                "mode": CONTOURING,
                "running": [w.alpha_contour, w.alpha_lag],
                "terminal": [w.beta_contour, w.beta_lag],
            }
        s = self.initial_state
        out = {
            "name": self.name,
            "path": self.path.to_dict(),
            "lip": {
                "com_height": self.lip.com_height,
                "step_duration": self.lip.step_duration,
                "gravity": self.lip.gravity,
            },
            "mass": self.mass,
            "weights": weights,
            "input_weight": list(self.input_weight),
            "progress_weight": self.progress_weight,
            "horizon": self.horizon,
            "v_max": self.v_max,
            "rectangle": {"lb": list(self.rect_lb), "ub": list(self.rect_ub)},
            "step_distance": {"min": self.delta_min, "max": self.delta_max},
            "gamma": self.gamma,
            "obstacles": [o.to_dict() for o in self.obstacles],
            "disturbance": None,
            "initial_state": {"x": s.x, "xdot": s.xdot, "y": s.y, "ydot": s.ydot, "theta": s.theta},
            "initial_stance": self.initial_stance,
            "max_steps": self.max_steps,
            "seed": self.seed,
            "output_dir": self.output_dir,
            "goal": {
                "tolerance": self.goal_tolerance,
                "xy_tolerance": self.goal_xy_tolerance,
                "projection_window": self.projection_window,
            },
            "solver": {f.name: getattr(self.solver, f.name) for f in fields(SolverConfig)},
        }
        if self.disturbance is not None:
            d = self.disturbance
            out["disturbance"] = {
                "force_range": list(d.force_range),
                "duration": d.duration,
                "max_gap": d.max_gap,
            }
        return out


_REQUIRED = ("name", "path", "weights", "input_weight", "progress_weight", "horizon", "v_max", "initial_state", "max_steps")
_OPTIONAL = (
    "lip", "mass", "rectangle", "step_distance", "gamma", "obstacles", "disturbance",
    "initial_stance", "seed", "output_dir", "goal", "solver",
)


def _check_keys(where: str, data: dict, allowed, required=()):
    if not isinstance(data, dict):
        raise ScenarioError(f"{where}: expected a mapping")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ScenarioError(f"{where}: unknown key(s) {', '.join(map(str, unknown))}")
    for key in required:
        if key not in data:
            name = f"{where}.{key}" if where != "scenario" else key
            raise ScenarioError(f"missing required field '{name}'")


def _num(name, value, kind=float):
    if isinstance(value, bool) or value is None:
        raise ScenarioError(f"{name}: expected a number, got {value!r}")
    try:
        out = kind(value)
    except (TypeError, ValueError):
        raise ScenarioError(f"{name}: expected a number, got {value!r}") from None
    if kind is int and out != value:
        raise ScenarioError(f"{name}: expected an integer, got {value!r}")
    return out


def _vec(name, value, length):
    if not isinstance(value, (list, tuple)) or len(value) != length:
        raise ScenarioError(f"{name}: expected a list of {length} numbers")
    return tuple(_num(f"{name}[{i}]", v) for i, v in enumerate(value))


def _weights(data) -> ErrorWeights:
    _check_keys("weights", data, ("mode", "running", "terminal"), ("mode", "running", "terminal"))
    mode = data["mode"]
    if mode == CARTESIAN:
        return ErrorWeights.cartesian(_num("weights.running", data["running"]), _num("weights.terminal", data["terminal"]))
    if mode == CONTOURING:
        return ErrorWeights.contouring(_vec("weights.running", data["running"], 2), _vec("weights.terminal", data["terminal"], 2))
    raise ScenarioError(f"weights.mode: expected 'cartesian' or 'contouring', got {mode!r}")


def _obstacle(i, data) -> Obstacle:
    where = f"obstacles[{i}]"
    _check_keys(where, data, ("radius", "start", "velocity", "inflation"), ("radius", "start"))
    return Obstacle(
        radius=_num(f"{where}.radius", data["radius"]),
        position=_vec(f"{where}.start", data["start"], 2),
        velocity=_vec(f"{where}.velocity", data.get("velocity", [0.0, 0.0]), 2),
        inflation=_num(f"{where}.inflation", data.get("inflation", 0.0)),
    )


def from_dict(data: dict) -> Scenario:
    """Validate a plain mapping and build a :class:`Scenario`."""
    _check_keys("scenario", data, _REQUIRED + _OPTIONAL, _REQUIRED)
    kw: dict = {}
    try:
        kw["name"] = str(data["name"])
        try:
            kw["path"] = path_from_dict(data["path"])
        except (ValueError, TypeError) as exc:
            raise ScenarioError(f"path: {exc}") from None
        kw["weights"] = _weights(data["weights"])
        kw["input_weight"] = _vec("input_weight", data["input_weight"], 3)
        kw["progress_weight"] = _num("progress_weight", data["progress_weight"])
        kw["horizon"] = _num("horizon", data["horizon"], int)
        kw["v_max"] = _num("v_max", data["v_max"])
        kw["max_steps"] = _num("max_steps", data["max_steps"], int)
        if kw["max_steps"] < 1:
            raise ScenarioError("max_steps: must be >= 1")

        st = data["initial_state"]
        _check_keys("initial_state", st, ("x", "xdot", "y", "ydot", "theta"), ("x", "y"))
        kw["initial_state"] = LipState(
            *(_num(f"initial_state.{k}", st.get(k, 0.0)) for k in ("x", "xdot", "y", "ydot", "theta"))
        )

        if "lip" in data:
            lip = data["lip"]
            _check_keys("lip", lip, ("com_height", "step_duration", "gravity"))
            kw["lip"] = LipParams(**{k: _num(f"lip.{k}", v) for k, v in lip.items()})
        if "mass" in data:
            kw["mass"] = _num("mass", data["mass"])
            if kw["mass"] <= 0:
                raise ScenarioError("mass: must be positive")
        if "rectangle" in data:
            rect = data["rectangle"]
            _check_keys("rectangle", rect, ("lb", "ub"), ("lb", "ub"))
            kw["rect_lb"] = _vec("rectangle.lb", rect["lb"], 3)
            kw["rect_ub"] = _vec("rectangle.ub", rect["ub"], 3)
        if "step_distance" in data:
            sd = data["step_distance"]
            _check_keys("step_distance", sd, ("min", "max"), ("min", "max"))
            kw["delta_min"] = _num("step_distance.min", sd["min"])
            kw["delta_max"] = _num("step_distance.max", sd["max"])
            if not 0 <= kw["delta_min"] < kw["delta_max"]:
                raise ScenarioError("step_distance: need 0 <= min < max")
        if "gamma" in data:
            kw["gamma"] = _num("gamma", data["gamma"])
        obstacles = data.get("obstacles") or []
        if not isinstance(obstacles, list):
            raise ScenarioError("obstacles: expected a list")
        kw["obstacles"] = tuple(_obstacle(i, o) for i, o in enumerate(obstacles))
        if "seed" in data:
            kw["seed"] = _num("seed", data["seed"], int)
        if data.get("disturbance") is not None:
            d = data["disturbance"]
            _check_keys("disturbance", d, ("force_range", "duration", "max_gap"))
            kw["disturbance"] = DisturbanceModel(
                force_range=_vec("disturbance.force_range", d.get("force_range", [-50.0, 50.0]), 2),
                duration=_num("disturbance.duration", d.get("duration", 0.1)),
                max_gap=_num("disturbance.max_gap", d.get("max_gap", 2.0)),
                mass=kw.get("mass", 48.0),
                seed=kw.get("seed", 0),
            )
        if "initial_stance" in data:
            stance = data["initial_stance"]
            if stance not in (ocp_builder.LEFT, ocp_builder.RIGHT):
                raise ScenarioError(f"initial_stance: expected 'left' or 'right', got {stance!r}")
            kw["initial_stance"] = stance
        if data.get("output_dir") is not None:
            kw["output_dir"] = str(data["output_dir"])
        if "goal" in data:
            g = data["goal"]
            _check_keys("goal", g, ("tolerance", "xy_tolerance", "projection_window"))
            if "tolerance" in g:
                kw["goal_tolerance"] = _num("goal.tolerance", g["tolerance"])
            if "xy_tolerance" in g:
                kw["goal_xy_tolerance"] = _num("goal.xy_tolerance", g["xy_tolerance"])
            if g.get("projection_window") is not None:
                kw["projection_window"] = _num("goal.projection_window", g["projection_window"])
                if kw["projection_window"] <= 0:
                    raise ScenarioError("goal.projection_window: must be positive")
            elif "projection_window" in g:
                kw["projection_window"] = None
        if "solver" in data:
            sv = data["solver"]
            names = [f.name for f in fields(SolverConfig)]
            _check_keys("solver", sv, names)
            kw["solver"] = SolverConfig(**sv)
        scn = Scenario(**kw)
        scn.ocp_spec()
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None
    return scn


def parse_scenario(text: str) -> Scenario:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"not valid YAML: {exc}") from None
    if not isinstance(data, dict):
        raise ScenarioError("scenario: expected a mapping at top level")
    return from_dict(data)


def dump_scenario(scenario: Scenario) -> str:
    return yaml.safe_dump(scenario.to_dict(), sort_keys=False)


def load(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


SHIPPED = ("circle_tracking", "circle_disturbed", "trail_cartesian", "overtake_mpcc")


def shipped(name: str) -> Scenario:
    """One of the scenario files bundled with the package."""
    if name not in SHIPPED:
        raise KeyError(f"no shipped scenario {name!r}; choose from {', '.join(SHIPPED)}")
    text = resources.files(__package__).joinpath("scenarios", f"{name}.yaml").read_text(encoding="utf-8")
    return parse_scenario(text)
