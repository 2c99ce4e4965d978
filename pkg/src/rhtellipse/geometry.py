"""Ellipse record and point-to-ellipse geometry.

The distance routine follows the robust bisection scheme for the closest
point on an ellipse (Eberly, "Distance from a Point to an Ellipse"),
vectorised over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def normalize_angle(alpha: float) -> float:
    """Fold an orientation into [0, pi)."""
    alpha = math.fmod(alpha, math.pi)
    if alpha < 0:
        alpha += math.pi
    # fmod of a value just below a multiple of pi can round up to pi
    if alpha >= math.pi:
        alpha = 0.0
    return alpha


@dataclass(frozen=True)
class Ellipse:
    """Five-parameter ellipse plus a support score.

    ``a`` and ``b`` are the half major and half minor axes in pixels,
    ``alpha`` is the major-axis orientation in radians and ``quality`` is
    the number of edge points voting for the ellipse.
    """

    x0: float
    y0: float
    a: float
    b: float
    alpha: float
    quality: int = 0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError(f"axes must be positive, got a={self.a}, b={self.b}")
        if self.b > self.a:
            raise ValueError(f"expected a >= b, got a={self.a}, b={self.b}")
        if self.quality < 0:
            raise ValueError("quality must be non-negative")
        object.__setattr__(self, "alpha", normalize_angle(float(self.alpha)))

    @property
    def features(self) -> np.ndarray:
        """The (x0, y0, a, b, alpha) feature vector."""
        return np.array([self.x0, self.y0, self.a, self.b, self.alpha], dtype=float)

    def with_quality(self, quality: int) -> Ellipse:
        return Ellipse(self.x0, self.y0, self.a, self.b, self.alpha, int(quality))

    def point_at(self, t):
        """Parametric point(s) at eccentric anomaly ``t``."""
        t = np.asarray(t, dtype=float)
        c, s = math.cos(self.alpha), math.sin(self.alpha)
        u = self.a * np.cos(t)
        v = self.b * np.sin(t)
        return self.x0 + u * c - v * s, self.y0 + u * s + v * c

    def vertices(self):
        """The two major-axis endpoints."""
        c, s = math.cos(self.alpha), math.sin(self.alpha)
        return (
            (self.x0 - self.a * c, self.y0 - self.a * s),
            (self.x0 + self.a * c, self.y0 + self.a * s),
        )

    def to_local(self, x, y):
        """Coordinates of (x, y) in the ellipse frame (major axis along u)."""
        c, s = math.cos(self.alpha), math.sin(self.alpha)
        dx = np.asarray(x, dtype=float) - self.x0
        dy = np.asarray(y, dtype=float) - self.y0
        return dx * c + dy * s, -dx * s + dy * c

    def bounding_box(self):
        """Axis-aligned extent as (xmin, ymin, xmax, ymax)."""
        c, s = math.cos(self.alpha), math.sin(self.alpha)
        hx = math.hypot(self.a * c, self.b * s)
        hy = math.hypot(self.a * s, self.b * c)
        return self.x0 - hx, self.y0 - hy, self.x0 + hx, self.y0 + hy


_BISECTION_STEPS = 96


def _root(r0, z0, z1, g):
    n0 = r0 * z0
    s0 = z1 - 1.0
    s1 = np.where(g < 0, 0.0, np.hypot(n0, z1) - 1.0)
    s = 0.5 * (s0 + s1)
    for _ in range(_BISECTION_STEPS):
        s = 0.5 * (s0 + s1)
        ratio0 = n0 / (s + r0)
        ratio1 = z1 / (s + 1.0)
        gs = ratio0 * ratio0 + ratio1 * ratio1 - 1.0
        s0 = np.where(gs > 0, s, s0)
        s1 = np.where(gs < 0, s, s1)
    return s


def distance_to_ellipse(ellipse: Ellipse, x, y) -> np.ndarray:
    """Euclidean distance from points (x, y) to the ellipse contour.

    Parameters
    ----------
    ellipse : Ellipse
    x, y : array_like
        Point coordinates, broadcast against each other.

    Returns
    -------
    numpy.ndarray
        Non-negative distances, same shape as the broadcast inputs.
    """
    u, v = ellipse.to_local(x, y)
    y0 = np.abs(np.atleast_1d(u))
    y1 = np.abs(np.atleast_1d(v))
    e0, e1 = float(ellipse.a), float(ellipse.b)
    # rotation round-off leaves on-axis points a hair off the axis, where
    # the bisection root degenerates
    snap = 1e-9 * e0
    y0 = np.where(y0 < snap, 0.0, y0)
    y1 = np.where(y1 < snap, 0.0, y1)
    dist = np.empty_like(y0)

    gen = (y0 > 0) & (y1 > 0)
    if np.any(gen):
        p0, p1 = y0[gen], y1[gen]
        z0, z1 = p0 / e0, p1 / e1
        g = z0 * z0 + z1 * z1 - 1.0
        r0 = (e0 / e1) ** 2
        with np.errstate(invalid="ignore", divide="ignore"):
            sbar = _root(r0, z0, z1, g)
        sbar = np.where(g == 0, 0.0, sbar)
        x0 = r0 * p0 / (sbar + r0)
        x1 = p1 / (sbar + 1.0)
        dist[gen] = np.hypot(x0 - p0, x1 - p1)

    on_minor = (y0 == 0) & (y1 > 0)
    dist[on_minor] = np.abs(y1[on_minor] - e1)

    on_major = y1 == 0
    if np.any(on_major):
        p0 = y0[on_major]
        denom = e0 * e0 - e1 * e1
        numer = e0 * p0
        inside = numer < denom
        out = np.abs(p0 - e0)
        if denom > 0:
            xde0 = np.where(inside, numer / denom, 0.0)
            x0 = e0 * xde0
            x1 = e1 * np.sqrt(np.clip(1.0 - xde0 * xde0, 0.0, None))
            out = np.where(inside, np.hypot(x0 - p0, x1), out)
        dist[on_major] = out

    return dist.reshape(np.broadcast(np.asarray(x), np.asarray(y)).shape)


def major_axis_side(ellipse: Ellipse, x, y) -> np.ndarray:
    """Sign (-1, 0, +1) of each point's offset from the major-axis line."""
    _, v = ellipse.to_local(x, y)
    return np.sign(v).astype(int)
