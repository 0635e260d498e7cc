"""Circular constant-velocity obstacles and the discrete-time barrier."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lip_model
from .lip_model import LipInput, LipParams, LipState


@dataclass(frozen=True)
class Obstacle:
    radius: float
    position: tuple[float, float]
    velocity: tuple[float, float] = (0.0, 0.0)
    inflation: float = 0.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("obstacle radius must be positive")
        if not self.inflation >= 0:
            raise ValueError("obstacle inflation must be nonnegative")
        object.__setattr__(self, "position", tuple(float(v) for v in self.position))
        object.__setattr__(self, "velocity", tuple(float(v) for v in self.velocity))

    @property
    def effective_radius(self) -> float:
        return self.radius + self.inflation

    def predict(self, steps_ahead: int, step_duration: float) -> np.ndarray:
        return predict(self, steps_ahead, step_duration)

    def advanced(self, step_duration: float) -> "Obstacle":
        """The same obstacle one step later."""
        p = self.predict(1, step_duration)
        return Obstacle(self.radius, (p[0], p[1]), self.velocity, self.inflation)

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "start": list(self.position),
            "velocity": list(self.velocity),
            "inflation": self.inflation,
        }


def predict(obstacle: Obstacle, steps_ahead: int, step_duration: float) -> np.ndarray:
    if steps_ahead < 0:
        raise ValueError("steps_ahead must be nonnegative")
    return np.asarray(obstacle.position) + steps_ahead * step_duration * np.asarray(obstacle.velocity)


def barrier(xy, obstacle_pos, r_eff: float) -> float:
    d = np.asarray(xy, dtype=float) - np.asarray(obstacle_pos, dtype=float)
    return float(d @ d - r_eff**2)


def cbf_residual(
    state: LipState,
    inp: LipInput,
    obstacle_pos,
    obstacle_pos_next,
    r_eff: float,
    gamma: float,
    params: LipParams,
) -> float:
    """``b(x+) - (1 - gamma) b(x)``; nonnegative when the barrier condition holds.

    ``b(x)`` is measured against ``obstacle_pos`` and ``b(x+)`` against the
    obstacle position one step later.
    """
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    nxt = lip_model.step(state, inp, params)
    return barrier(lip_model.output(nxt), obstacle_pos_next, r_eff) - (1.0 - gamma) * barrier(
        lip_model.output(state), obstacle_pos, r_eff
    )
