"""Parametric planar reference paths and closest-point projection.

Lines and arcs are arc-length parametrized.  Splines are natural cubic
splines in the cumulative chord length of their waypoints, so the path
parameter of a spline is *not* exact arc length.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline

DEGENERATE_TANGENT = 1e-12


class DegenerateTangentError(ValueError):
    pass


class PathEval(NamedTuple):
    point: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    clamped: np.ndarray | bool


class Path:
    """Base class: subclasses implement ``_raw(theta)`` on in-domain arrays."""

    kind = "abstract"
    domain_end: float

    def _raw(self, theta: np.ndarray):
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def clamp(self, theta):
        theta = np.asarray(theta, dtype=float)
        clipped = np.clip(theta, 0.0, self.domain_end)
        return clipped, clipped != theta

    def evaluate(self, theta) -> PathEval:
        """Point, first and second derivative at ``theta`` (scalar or 1-D array).

        Out-of-domain values are clamped to ``[0, domain_end]`` and flagged.
        Shapes: scalar input gives ``(2,)`` arrays, array input ``(n, 2)``.
        """
        scalar = np.ndim(theta) == 0
        th, flag = self.clamp(np.atleast_1d(theta))
        p, d1, d2 = self._raw(th)
        if scalar:
            return PathEval(p[0], d1[0], d2[0], bool(flag[0]))
        return PathEval(p, d1, d2, flag)

    def __call__(self, theta):
        return self.evaluate(theta).point


class LinePath(Path):
    kind = "line"

    def __init__(self, start, end):
        self.start = np.asarray(start, dtype=float).reshape(2)
        self.end = np.asarray(end, dtype=float).reshape(2)
        delta = self.end - self.start
        length = float(np.hypot(*delta))
        if length <= 0:
            raise ValueError("line path needs distinct start and end points")
        self.domain_end = length
        self.direction = delta / length

    def _raw(self, th):
        p = self.start + th[:, None] * self.direction
        d1 = np.broadcast_to(self.direction, p.shape).copy()
        return p, d1, np.zeros_like(p)

    def to_dict(self):
        return {"type": "line", "start": self.start.tolist(), "end": self.end.tolist()}


class ArcPath(Path):
    """Circular arc; positive sweep runs counter-clockwise."""

    kind = "arc"

    def __init__(self, center, radius, start_angle, sweep):
        self.center = np.asarray(center, dtype=float).reshape(2)
        self.radius = float(radius)
        self.start_angle = float(start_angle)
        self.sweep = float(sweep)
        if self.radius <= 0:
            raise ValueError("arc radius must be positive")
        if self.sweep == 0:
            raise ValueError("arc sweep must be nonzero")
        self.sign = 1.0 if self.sweep > 0 else -1.0
        self.domain_end = self.radius * abs(self.sweep)

    def _raw(self, th):
        ang = self.start_angle + self.sign * th / self.radius
        c, s = np.cos(ang), np.sin(ang)
        p = self.center + self.radius * np.column_stack([c, s])
        d1 = self.sign * np.column_stack([-s, c])
        d2 = -np.column_stack([c, s]) / self.radius
        return p, d1, d2

    def to_dict(self):
        return {
            "type": "arc",
            "center": self.center.tolist(),
            "radius": self.radius,
            "start_angle": self.start_angle,
            "sweep": self.sweep,
        }


class SplinePath(Path):
    """Natural cubic spline through waypoints, parametrized by chord length."""

    kind = "spline"

    def __init__(self, waypoints):
        pts = np.asarray(waypoints, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise ValueError("spline needs at least two [x, y] waypoints")
        chords = np.hypot(*np.diff(pts, axis=0).T)
        if np.any(chords <= 0):
            raise ValueError("consecutive spline waypoints must differ")
        self.waypoints = pts
        self.knots = np.concatenate([[0.0], np.cumsum(chords)])
        self.domain_end = float(self.knots[-1])
        self._spline = CubicSpline(self.knots, pts, bc_type="natural")
        self._d1 = self._spline.derivative(1)
        self._d2 = self._spline.derivative(2)
        probe = self._d1(np.linspace(0.0, self.domain_end, 2001))
        if np.min(np.hypot(probe[:, 0], probe[:, 1])) < DEGENERATE_TANGENT:
            raise DegenerateTangentError("spline has a vanishing tangent")

    def _raw(self, th):
        return self._spline(th), self._d1(th), self._d2(th)

    def to_dict(self):
        return {"type": "spline", "waypoints": self.waypoints.tolist()}


def path_from_dict(spec: dict) -> Path:
    spec = dict(spec)
    kind = spec.pop("type", None)
    builders = {"line": LinePath, "arc": ArcPath, "spline": SplinePath}
    if kind not in builders:
        raise ValueError(f"path.type must be one of {sorted(builders)}, got {kind!r}")
    try:
        return builders[kind](**spec)
    except TypeError as exc:
        raise ValueError(f"bad fields for {kind} path: {exc}") from None


def evaluate(path: Path, theta) -> PathEval:
    return path.evaluate(theta)


def slope(path: Path, theta) -> float | np.ndarray:
    """Tangent angle ``atan2(dy/dtheta, dx/dtheta)``; arrays come back unwrapped."""
    d1 = path.evaluate(theta).d1
    d1 = np.atleast_2d(d1)
    if np.any(np.hypot(d1[:, 0], d1[:, 1]) < DEGENERATE_TANGENT):
        raise DegenerateTangentError("path tangent vanishes")
    phi = np.unwrap(np.arctan2(d1[:, 1], d1[:, 0]))
    return float(phi[0]) if np.ndim(theta) == 0 else phi


def slope_rate(d1: np.ndarray, d2: np.ndarray) -> np.ndarray:
    """d(slope)/d(theta) = (x' y'' - y' x'') / (x'^2 + y'^2), row-wise."""
    d1 = np.atleast_2d(d1)
    d2 = np.atleast_2d(d2)
    num = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    return num / (d1[:, 0] ** 2 + d1[:, 1] ** 2)


def _grid_size(path: Path) -> int:
    return max(200, int(math.ceil(path.domain_end / 0.05)) + 1)


def project(path: Path, point, grid: int | None = None, bounds=None) -> float:
    """Global minimizer of ``|point - path(theta)|^2`` over the domain.

    Coarse scan then safeguarded Newton on the winning grid cell.  Ties go
    to the smallest parameter.  ``bounds`` restricts the search to a
    sub-interval, which closed or self-approaching paths need to keep the
    projection on the current branch.
    """
    q = np.asarray(point, dtype=float).reshape(2)
    a, b = 0.0, path.domain_end
    if bounds is not None:
        a, b = max(a, float(bounds[0])), min(b, float(bounds[1]))
        if a > b:
            raise ValueError("empty projection window")
    n = grid or (max(50, int(math.ceil((b - a) / 0.05)) + 1) if bounds is not None else _grid_size(path))
    ts = np.linspace(a, b, n)
    diff = q - path.evaluate(ts).point
    cost = np.einsum("ij,ij->i", diff, diff)
    # costs equal up to rounding count as ties; the first one wins
    tie = 1e-12 * (1.0 + float(cost.min()))
    i = int(np.flatnonzero(cost <= cost.min() + tie)[0])
    lo = ts[max(i - 1, 0)]
    hi = ts[min(i + 1, n - 1)]
    best_t, best_c = float(ts[i]), float(cost[i])

    t = best_t
    for _ in range(50):
        p, d1, d2, _ = path.evaluate(t)
        r = q - p
        g = -float(r @ d1)
        h = float(d1 @ d1 - r @ d2)
        if h > 0:
            t_new = t - g / h
        else:
            t_new = hi if g < 0 else lo
        t_new = min(max(t_new, lo), hi)
        if abs(t_new - t) < 1e-13:
            t = t_new
            break
        t = t_new

    c = q - path.evaluate(t).point
    c = float(c @ c)
    if c <= best_c + tie:
        best_t = t
    return best_t
