"""Contouring-control footstep planning on the step-to-step 3D LIP."""

from .closed_loop_sim import DisturbanceModel, RunReport, StepLog, run, summarize
from .error_frames import ErrorWeights, contour_lag_error, frame_matrix, weight_matrices
from .lip_model import LipInput, LipParams, LipState, apply_impulse, output, step, step_matrices
from .nlp_solver import SolveResult, SolverConfig, solve, warm_start
from .obstacle_field import Obstacle, barrier, cbf_residual
from .ocp_builder import Nlp, OcpSpec, build, eval_constraints, eval_cost
from .path_geometry import ArcPath, LinePath, Path, SplinePath, project, slope
from .qp import BACKEND as QP_BACKEND
from .scenario import Scenario, ScenarioError, load, parse_scenario, shipped

__version__ = "0.1.0"

__all__ = [
    "ArcPath", "DisturbanceModel", "ErrorWeights", "LinePath", "LipInput", "LipParams",
    "LipState", "Nlp", "Obstacle", "OcpSpec", "Path", "QP_BACKEND", "RunReport", "Scenario",
    "ScenarioError", "SolveResult", "SolverConfig", "SplinePath", "StepLog", "apply_impulse",
    "barrier", "build", "cbf_residual", "contour_lag_error", "eval_constraints", "eval_cost",
    "frame_matrix", "load", "output", "parse_scenario", "project", "run", "shipped", "slope",
    "solve", "step", "step_matrices", "summarize", "warm_start", "weight_matrices",
]
