"""2D polyline geometry used by routes, scripts and trajectory prediction."""

from __future__ import annotations

import math
from bisect import bisect_right

import numpy as np


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    return math.atan2(math.sin(a), math.cos(a))


class Polyline:
    """Arc-length parameterized polyline; optionally closed (cyclic)."""

    def __init__(self, points, closed: bool = False):
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise ValueError("polyline needs at least two 2D points")
        if closed and not np.allclose(pts[0], pts[-1]):
            pts = np.vstack([pts, pts[0]])
        self.points = pts
        self.closed = closed
        seg = np.diff(pts, axis=0)
        self._seg_len = np.hypot(seg[:, 0], seg[:, 1])
        if np.any(self._seg_len <= 0):
            raise ValueError("degenerate (zero-length) polyline segment")
        self.cum = np.concatenate([[0.0], np.cumsum(self._seg_len)])
        self.length = float(self.cum[-1])
        self._seg_dir = seg / self._seg_len[:, None]

    def _locate(self, s: float) -> tuple[int, float]:
        if self.closed:
            s = s % self.length
        else:
            s = min(max(s, 0.0), self.length)
        i = bisect_right(self.cum, s) - 1
        i = min(i, len(self._seg_len) - 1)
        return i, s - self.cum[i]

    def point_at(self, s: float) -> tuple[float, float]:
        i, ds = self._locate(s)
        p = self.points[i]
        d = self._seg_dir[i]
        return (float(p[0] + d[0] * ds), float(p[1] + d[1] * ds))

    def heading_at(self, s: float) -> float:
        i, _ = self._locate(s)
        d = self._seg_dir[i]
        return math.atan2(d[1], d[0])

    def sample(self, s0: float, speed: float, n: int, dt: float) -> np.ndarray:
        """Positions at s0 + speed*k*dt for k in 0..n-1, shape (n, 2)."""
        s = s0 + speed * dt * np.arange(n)
        if self.closed:
            s = np.mod(s, self.length)
        else:
            s = np.clip(s, 0.0, self.length)
        x = np.interp(s, self.cum, self.points[:, 0])
        y = np.interp(s, self.cum, self.points[:, 1])
        return np.column_stack([x, y])

    def project(self, x: float, y: float, s_hint: float | None = None) -> tuple[float, float]:
        """Nearest point on the polyline; returns (arc s, distance).

        With a hint, ties between equally near segments resolve toward the
        hint (matters on closed loops where opposite sides can be close).
        """
        p = np.array([x, y])
        a = self.points[:-1]
        d = self._seg_dir
        rel = p[None, :] - a
        t = np.clip((rel * d).sum(axis=1), 0.0, self._seg_len)
        foot = a + d * t[:, None]
        dist = np.hypot(foot[:, 0] - p[0], foot[:, 1] - p[1])
        order = np.argsort(dist, kind="stable")
        best = order[0]
        if s_hint is not None and len(order) > 1:
            cand = [i for i in order if dist[i] <= dist[best] + 1.0]
            if len(cand) > 1:
                ref = s_hint % self.length if self.closed else s_hint
                def gap(i):
                    g = abs((self.cum[i] + t[i]) - ref)
                    return min(g, self.length - g) if self.closed else g
                best = min(cand, key=gap)
        return float(self.cum[best] + t[best]), float(dist[best])

    def unwrap(self, s_proj: float, s_prev: float) -> float:
        """Lift a projected arc position onto the monotone progress axis."""
        if not self.closed:
            return s_proj
        base = s_prev - (s_prev % self.length)
        cand = [base + s_proj - self.length, base + s_proj, base + s_proj + self.length]
        return min(cand, key=lambda s: abs(s - s_prev))

    def offset_section(self, s_from: float, s_to: float, lateral: float,
                       step: float = 4.0) -> np.ndarray:
        """Points laterally offset from the polyline between two arc positions.

        Positive lateral is to the left of travel direction.
        """
        n = max(2, int(abs(s_to - s_from) / step) + 1)
        ss = np.linspace(s_from, s_to, n)
        out = np.empty((n, 2))
        for k, s in enumerate(ss):
            px, py = self.point_at(s)
            h = self.heading_at(s)
            out[k] = (px - math.sin(h) * lateral, py + math.cos(h) * lateral)
        return out
