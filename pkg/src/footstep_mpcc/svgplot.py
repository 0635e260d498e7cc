"""Minimal static SVG charts, written as plain text."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 400
MARGIN = dict(left=70, right=20, top=36, bottom=52)
PALETTE = ("#1f4fbf", "#c0392b", "#2e8b57", "#8e44ad", "#d35400")


def _nice_ticks(lo, hi, n=6):
    if not math.isfinite(lo) or not math.isfinite(hi):
        return [0.0]
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(n - 1, 1)
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.floor(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        if t >= lo - 1e-9 * step:
            ticks.append(round(t, 12))
        t += step
    return ticks


class Canvas:
    """Data-to-pixel mapping plus an element buffer."""

    def __init__(self, xlim, ylim, equal=False, width=WIDTH, height=HEIGHT):
        self.w, self.h = width, height
        x0, x1 = xlim
        y0, y1 = ylim
        if x1 - x0 < 1e-12:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 - y0 < 1e-12:
            y0, y1 = y0 - 0.5, y1 + 0.5
        pw = width - MARGIN["left"] - MARGIN["right"]
        ph = height - MARGIN["top"] - MARGIN["bottom"]
        if equal:
            scale = min(pw / (x1 - x0), ph / (y1 - y0))
            cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
            x0, x1 = cx - 0.5 * pw / scale, cx + 0.5 * pw / scale
            y0, y1 = cy - 0.5 * ph / scale, cy + 0.5 * ph / scale
        self.xlim, self.ylim = (x0, x1), (y0, y1)
        self.pw, self.ph = pw, ph
        self.items: list[str] = []

    def px(self, x):
        x0, x1 = self.xlim
        return MARGIN["left"] + (np.asarray(x, dtype=float) - x0) / (x1 - x0) * self.pw

    def py(self, y):
        y0, y1 = self.ylim
        return MARGIN["top"] + (1.0 - (np.asarray(y, dtype=float) - y0) / (y1 - y0)) * self.ph

    def polyline(self, x, y, color, width=1.5, dash=None):
        x, y = np.asarray(x, float), np.asarray(y, float)
        ok = np.isfinite(x) & np.isfinite(y)
        if ok.sum() < 2:
            return
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(self.px(x[ok]), self.py(y[ok])))
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.items.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"{d}/>')

    def circle(self, x, y, r_data=None, r_px=3.0, color="#000", fill=None, opacity=1.0):
        r = r_px if r_data is None else r_data * self.pw / (self.xlim[1] - self.xlim[0])
        f = fill or "none"
        self.items.append(
            f'<circle cx="{float(self.px(x)):.2f}" cy="{float(self.py(y)):.2f}" r="{r:.2f}" '
            f'stroke="{color}" fill="{f}" fill-opacity="{opacity}"/>'
        )

    def marker(self, x, y, heading, color, size=7.0):
        """Small triangle pointing along ``heading`` (radians, data frame)."""
        cx, cy = float(self.px(x)), float(self.py(y))
        c, s = math.cos(heading), -math.sin(heading)
        pts = [(size, 0.0), (-0.6 * size, 0.5 * size), (-0.6 * size, -0.5 * size)]
        pts = [(cx + c * a - s * b, cy + s * a + c * b) for a, b in pts]
        p = " ".join(f"{a:.2f},{b:.2f}" for a, b in pts)
        self.items.append(f'<polygon points="{p}" fill="{color}" fill-opacity="0.7"/>')

    def text(self, x_px, y_px, s, anchor="middle", size=12, rotate=None):
        t = f' transform="rotate({rotate} {x_px:.1f} {y_px:.1f})"' if rotate is not None else ""
        self.items.append(
            f'<text x="{x_px:.1f}" y="{y_px:.1f}" font-size="{size}" text-anchor="{anchor}" '
            f'font-family="sans-serif"{t}>{escape(s)}</text>'
        )

    def axes(self, xlabel, ylabel, title):
        left, top = MARGIN["left"], MARGIN["top"]
        self.items.insert(0, f'<rect x="{left}" y="{top}" width="{self.pw}" height="{self.ph}" fill="none" stroke="#444"/>')
        for t in _nice_ticks(*self.xlim):
            x = float(self.px(t))
            self.items.append(f'<line x1="{x:.1f}" y1="{top + self.ph}" x2="{x:.1f}" y2="{top + self.ph + 5}" stroke="#444"/>')
            self.items.append(f'<line x1="{x:.1f}" y1="{top}" x2="{x:.1f}" y2="{top + self.ph}" stroke="#ddd"/>')
            self.text(x, top + self.ph + 18, f"{t:g}", size=11)
        for t in _nice_ticks(*self.ylim):
            y = float(self.py(t))
            self.items.append(f'<line x1="{left - 5}" y1="{y:.1f}" x2="{left}" y2="{y:.1f}" stroke="#444"/>')
            self.items.append(f'<line x1="{left}" y1="{y:.1f}" x2="{left + self.pw}" y2="{y:.1f}" stroke="#ddd"/>')
            self.text(left - 8, y + 4, f"{t:g}", anchor="end", size=11)
        self.text(left + self.pw / 2, self.h - 12, xlabel)
        self.text(16, top + self.ph / 2, ylabel, rotate=-90)
        self.text(left + self.pw / 2, 22, title, size=14)

    def legend(self, entries):
        x = MARGIN["left"] + 10
        y = MARGIN["top"] + 16
        for label, color in entries:
            self.items.append(f'<line x1="{x}" y1="{y - 4}" x2="{x + 22}" y2="{y - 4}" stroke="{color}" stroke-width="2"/>')
            self.text(x + 28, y, label, anchor="start", size=11)
            y += 16

    def render(self) -> str:
        body = "\n".join(self.items)
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.w}" height="{self.h}" '
            f'viewBox="0 0 {self.w} {self.h}">\n<rect width="100%" height="100%" fill="white"/>\n{body}\n</svg>\n'
        )


def _limits(arrays, pad=0.05):
    vals = np.concatenate([np.ravel(np.asarray(a, float)) for a in arrays if np.size(a)])
    vals = vals[np.isfinite(vals)]
    if vals.size == 0:
        return (0.0, 1.0)
    lo, hi = float(vals.min()), float(vals.max())
    span = hi - lo if hi > lo else max(abs(hi), 1.0)
    return lo - pad * span, hi + pad * span


def line_chart(x, series, xlabel, ylabel, title, hlines=()) -> str:
    """``series`` is a list of ``(label, values)``; ``hlines`` of ``(label, level)``."""
    ys = [v for _, v in series] + [[lvl] for _, lvl in hlines]
    cv = Canvas(_limits([x]), _limits(ys))
    legend = []
    for i, (label, v) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        cv.polyline(x, v, color)
        legend.append((label, color))
    for j, (label, lvl) in enumerate(hlines):
        color = PALETTE[(len(series) + j) % len(PALETTE)]
        cv.polyline([cv.xlim[0], cv.xlim[1]], [lvl, lvl], color, dash="6,4")
        legend.append((label, color))
    cv.axes(xlabel, ylabel, title)
    cv.legend(legend)
    return cv.render()


def trajectory_chart(path_xy, com_xy, feet=(), obstacles=(), title="trajectory") -> str:
    """Reference path (red), COM trace (blue), footsteps and obstacle discs."""
    path_xy = np.asarray(path_xy, float)
    com_xy = np.asarray(com_xy, float).reshape(-1, 2)
    feet_xy = np.array([[f[1], f[2]] for f in feet]).reshape(-1, 2)
    obs_xy = np.array([[o[0], o[1]] for o in obstacles]).reshape(-1, 2)
    xs = [path_xy[:, 0], com_xy[:, 0], feet_xy[:, 0], obs_xy[:, 0]]
    ys = [path_xy[:, 1], com_xy[:, 1], feet_xy[:, 1], obs_xy[:, 1]]
    cv = Canvas(_limits(xs), _limits(ys, pad=0.15), equal=True)
    cv.polyline(path_xy[:, 0], path_xy[:, 1], "#c0392b", width=2.0)
    cv.polyline(com_xy[:, 0], com_xy[:, 1], "#1f4fbf", width=1.5)
    for foot, x, y, heading in feet:
        cv.marker(x, y, heading, "#1f4fbf" if foot == "right" else "#c0392b", size=5.0)
    for x, y, r in obstacles:
        cv.circle(x, y, r_data=r, color="#555", fill="#999", opacity=0.15)
    cv.axes("x [m]", "y [m]", title)
    cv.legend([("reference path", "#c0392b"), ("COM", "#1f4fbf")])
    return cv.render()
