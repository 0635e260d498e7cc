"""Step-to-step 3D linear inverted pendulum (LIP) prediction model.

State ``(x, xdot, y, ydot, theta)`` is sampled at the exchange of support.
The input ``(ux, uy, utheta)`` is the COM position at the start of the step
minus the new stance-foot position, plus the heading change of the
reachability rectangle.  Within one step the COM obeys
``xddot = omega**2 * (x - p_x)`` with the foot ``p`` held fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

STATE_DIM = 5
INPUT_DIM = 3


@dataclass(frozen=True)
class LipParams:
    com_height: float = 0.9
    step_duration: float = 0.4
    gravity: float = 9.81
    omega: float = field(init=False, repr=False)

    def __post_init__(self):
        for name in ("com_height", "step_duration", "gravity"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value}")
        object.__setattr__(self, "omega", math.sqrt(self.gravity / self.com_height))


@dataclass(frozen=True)
class LipState:
    x: float = 0.0
    xdot: float = 0.0
    y: float = 0.0
    ydot: float = 0.0
    theta: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.xdot, self.y, self.ydot, self.theta], dtype=float)

    @classmethod
    def from_array(cls, arr) -> "LipState":
        a = np.asarray(arr, dtype=float).reshape(STATE_DIM)
        return cls(*(float(v) for v in a))


@dataclass(frozen=True)
class LipInput:
    ux: float = 0.0
    uy: float = 0.0
    utheta: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.ux, self.uy, self.utheta], dtype=float)

    @classmethod
    def from_array(cls, arr) -> "LipInput":
        a = np.asarray(arr, dtype=float).reshape(INPUT_DIM)
        return cls(*(float(v) for v in a))


def step_matrices(params: LipParams) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form ``A`` (5x5) and ``B`` (5x3) of ``x+ = A x + B u``."""
    w = params.omega
    wt = w * params.step_duration
    ch, sh = math.cosh(wt), math.sinh(wt)
    block_a = np.array([[1.0, sh / w], [0.0, ch]])
    block_b = np.array([ch - 1.0, w * sh])

    A = np.zeros((STATE_DIM, STATE_DIM))
    B = np.zeros((STATE_DIM, INPUT_DIM))
    A[0:2, 0:2] = block_a
    A[2:4, 2:4] = block_a
    A[4, 4] = 1.0
    B[0:2, 0] = block_b
    B[2:4, 1] = block_b
    B[4, 2] = 1.0
    return A, B


def step(state: LipState, inp: LipInput, params: LipParams) -> LipState:
    A, B = step_matrices(params)
    return LipState.from_array(A @ state.as_array() + B @ inp.as_array())


def inverse_step(state: LipState, inp: LipInput, params: LipParams) -> LipState:
    """Recover the state at the start of a step from the state at its end."""
    A, B = step_matrices(params)
    prev = np.linalg.solve(A, state.as_array() - B @ inp.as_array())
    return LipState.from_array(prev)


def output(state: LipState) -> tuple[float, float]:
    return (state.x, state.y)


def output_matrix() -> np.ndarray:
    C = np.zeros((2, STATE_DIM))
    C[0, 0] = 1.0
    C[1, 2] = 1.0
    return C


def apply_impulse(state: LipState, dvx: float, dvy: float) -> LipState:
    if not (math.isfinite(dvx) and math.isfinite(dvy)):
        raise ValueError("velocity impulse must be finite")
    return LipState(state.x, state.xdot + dvx, state.y, state.ydot + dvy, state.theta)


def force_to_impulse(force: float, duration: float, mass: float) -> float:
    """Velocity change of a point mass under a constant force pulse."""
    if mass <= 0 or duration <= 0:
        raise ValueError("mass and duration must be positive")
    return force * duration / mass
