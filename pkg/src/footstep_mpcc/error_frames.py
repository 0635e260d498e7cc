"""Cartesian and contouring/lag error representations and their weights."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .path_geometry import Path, slope

CARTESIAN = "cartesian"
CONTOURING = "contouring"


@dataclass(frozen=True)
class ErrorWeights:
    """Tracking weights.

    In ``cartesian`` mode only ``alpha`` (running) and ``beta`` (terminal)
    are used.  In ``contouring`` mode the pairs are (contouring, lag).
    """

    mode: str = CONTOURING
    alpha: float = 1.0
    beta: float = 1.0
    alpha_contour: float = 1.0
    alpha_lag: float = 1.0
    beta_contour: float = 1.0
    beta_lag: float = 1.0

    def __post_init__(self):
        if self.mode not in (CARTESIAN, CONTOURING):
            raise ValueError(f"weights.mode must be 'cartesian' or 'contouring', got {self.mode!r}")
        for name in ("alpha", "beta", "alpha_contour", "alpha_lag", "beta_contour", "beta_lag"):
            if not getattr(self, name) > 0:
                raise ValueError(f"weights.{name} must be positive")

    @classmethod
    def cartesian(cls, alpha: float, beta: float) -> "ErrorWeights":
        return cls(mode=CARTESIAN, alpha=alpha, beta=beta)

    @classmethod
    def contouring(cls, running, terminal) -> "ErrorWeights":
        (a1, a2), (b1, b2) = running, terminal
        return cls(mode=CONTOURING, alpha_contour=a1, alpha_lag=a2, beta_contour=b1, beta_lag=b2)

    def running_diag(self) -> np.ndarray:
        if self.mode == CARTESIAN:
            return np.array([self.alpha, self.alpha])
        return np.array([self.alpha_contour, self.alpha_lag])

    def terminal_diag(self) -> np.ndarray:
        if self.mode == CARTESIAN:
            return np.array([self.beta, self.beta])
        return np.array([self.beta_contour, self.beta_lag])


def frame_matrix(phi: float) -> np.ndarray:
    s, c = np.sin(phi), np.cos(phi)
    return np.array([[s, -c], [-c, -s]])


def frame_matrix_derivative(phi: float) -> np.ndarray:
    s, c = np.sin(phi), np.cos(phi)
    return np.array([[c, s], [s, -c]])


def contour_lag_error(robot_xy, path: Path, theta: float) -> tuple[float, float]:
    """(contouring, lag) approximation at path parameter ``theta``."""
    e = np.asarray(robot_xy, dtype=float).reshape(2) - path.evaluate(theta).point
    ec, el = frame_matrix(slope(path, theta)) @ e
    return float(ec), float(el)


def weight_matrices(weights: ErrorWeights, phi: float) -> tuple[np.ndarray, np.ndarray]:
    if weights.mode == CARTESIAN:
        eye = np.eye(2)
        return weights.alpha * eye, weights.beta * eye
    P = frame_matrix(phi)
    Q = P.T @ np.diag(weights.running_diag()) @ P
    W = P.T @ np.diag(weights.terminal_diag()) @ P
    return Q, W
