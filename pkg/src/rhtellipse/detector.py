"""Randomized Hough Transform ellipse detector.

Each sampled pair of edge points is taken as the two ends of a major axis,
which fixes the centre, half major axis and orientation. Every other edge
point then votes for a half minor axis through the law-of-cosines relation
below, into a quantised one-dimensional accumulator. A peak with enough
votes becomes a candidate, which must also show contour support on both
sides of its major axis.

Half minor axis from a third point P, with d = |P - centre|,
f = |P - vertex| and tau the angle at the centre between the major axis
and P::

    cos(tau) = (a^2 + d^2 - f^2) / (2 a d)
    b^2      = a^2 d^2 sin^2(tau) / (a^2 - d^2 cos^2(tau))
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import ConfigError, NoEdgesError
from .geometry import Ellipse, distance_to_ellipse, normalize_angle
from .raster_io import EdgeMap

__all__ = [
    "DetectionConfig",
    "Ellipse",
    "MinorAxisAccumulator",
    "RunStats",
    "VertexPair",
    "contour_census",
    "detect_all",
    "detect_candidate",
    "filter_candidate",
    "make_rng",
    "minor_axis_votes",
    "params_from_vertices",
    "sample_pairs",
    "side_counts",
    "vote_minor_axis",
]

RNG_ALGORITHM = "PCG64"


def make_rng(seed: int) -> np.random.Generator:
    """The generator used for pair sampling: numpy's PCG64 seeded with ``seed``."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class DetectionConfig:
    """Detector knobs.

    ``c_factor`` (pairs drawn per edge point) and ``quality_threshold``
    default to 2 and 200; the remaining defaults are engineering choices.
    """

    c_factor: int = 2
    a_min: float = 10.0
    a_max: float = 100.0
    b_min: float = 5.0
    quality_threshold: int = 200
    side_balance_min: float = 0.35
    contour_tolerance: float = 1.5
    accumulator_bin_width: float = 2.0
    rng_seed: int = 0

    def __post_init__(self):
        if int(self.c_factor) != self.c_factor or self.c_factor < 1:
            raise ConfigError(f"c_factor must be an integer >= 1, got {self.c_factor}")
        if not 0 < self.a_min <= self.a_max:
            raise ConfigError(f"need 0 < a_min <= a_max, got {self.a_min}, {self.a_max}")
        if not self.b_min > 0:
            raise ConfigError(f"b_min must be positive, got {self.b_min}")
        if int(self.quality_threshold) != self.quality_threshold or self.quality_threshold < 1:
            raise ConfigError(f"quality_threshold must be an integer >= 1, got {self.quality_threshold}")
        if not 0 < self.side_balance_min <= 1:
            raise ConfigError(f"side_balance_min must be in (0, 1], got {self.side_balance_min}")
        if not self.contour_tolerance > 0:
            raise ConfigError("contour_tolerance must be positive")
        if not self.accumulator_bin_width > 0:
            raise ConfigError("accumulator_bin_width must be positive")
        if not 0 <= int(self.rng_seed) < 2**64:
            raise ConfigError("rng_seed must fit in 64 unsigned bits")


@dataclass
class RunStats:
    virtual_ellipses: int
    real_ellipses: int
    ellipse_quality: int
    search_point_pairs: int
    total_edge_points: int


class VertexPair(NamedTuple):
    p1: tuple
    p2: tuple


@dataclass
class MinorAxisAccumulator:
    """Vote histogram over the half minor axis; bin ``k`` covers [k*w, (k+1)*w)."""

    bin_width: float
    bins: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def index(self, b):
        return np.floor(np.asarray(b, dtype=float) / self.bin_width).astype(np.int64)

    def add(self, b_values) -> None:
        idx = self.index(np.atleast_1d(b_values))
        if idx.size == 0:
            return
        if idx.min() < 0:
            raise ValueError("negative minor axis")
        need = int(idx.max()) + 1
        if need > len(self.bins):
            self.bins = np.concatenate([self.bins, np.zeros(need - len(self.bins), dtype=np.int64)])
        np.add.at(self.bins, idx, 1)

    @property
    def total(self) -> int:
        return int(self.bins.sum())

    def peak(self):
        """(bin centre, votes) of the fullest bin; lowest bin wins ties."""
        if self.total == 0:
            return None, 0
        k = int(np.argmax(self.bins))
        return (k + 0.5) * self.bin_width, int(self.bins[k])


def sample_pairs(edges: EdgeMap, config: DetectionConfig, rng=None) -> list:
    """Draw ``m = c_factor * n`` random index pairs and keep the usable ones.

    Each draw picks two edge points independently and uniformly. Draws
    with coincident endpoints, or whose separation falls outside
    ``[2*a_min, 2*a_max]``, are discarded but still count toward ``m``.
    """
    n = len(edges)
    if n == 0:
        raise NoEdgesError("edge map is empty; nothing to sample")
    if rng is None:
        rng = make_rng(config.rng_seed)
    idx = _draw_indices(n, config.c_factor * n, rng)
    keep = _admissible(edges.points, idx, config)
    pts = edges.points
    return [
        VertexPair(tuple(int(v) for v in pts[i]), tuple(int(v) for v in pts[j]))
        for i, j in idx[keep]
    ]


def _draw_indices(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, n, size=(m, 2))


def _admissible(points: np.ndarray, idx: np.ndarray, config: DetectionConfig) -> np.ndarray:
    p = points[idx[:, 0]].astype(float)
    q = points[idx[:, 1]].astype(float)
    sep = np.hypot(q[:, 0] - p[:, 0], q[:, 1] - p[:, 1])
    return (idx[:, 0] != idx[:, 1]) & (sep >= 2 * config.a_min) & (sep <= 2 * config.a_max)


def params_from_vertices(pair: VertexPair):
    """Centre, half major axis and orientation from the two major-axis ends.

    Returns ``(x0, y0, a, alpha)`` with alpha folded into [0, pi).
    """
    (x1, y1), (x2, y2) = pair
    x0 = (x1 + x2) / 2
    y0 = (y1 + y2) / 2
    a = math.hypot(x2 - x1, y2 - y1) / 2
    if x2 == x1:
        alpha = math.pi / 2
    else:
        alpha = normalize_angle(math.atan2(y2 - y1, x2 - x1))
    return x0, y0, a, alpha


def vote_minor_axis(center, a: float, third, vertex) -> Optional[float]:
    """Half minor axis implied by ``third`` for the given centre/vertex, or None.

    None means the third point cannot lie on an ellipse with this major
    axis: it sits on the centre, beyond the vertex distance, or the
    geometry is otherwise inconsistent. A point at exactly the vertex
    distance (a circle) yields ``b == a``.

    With ``d`` the centre distance of the third point and ``tau`` its
    angle to the vertex direction,
    ``b^2 = a^2 d^2 sin^2(tau) / (a^2 - d^2 cos^2(tau))``. Only squares of
    ``d cos(tau)`` and ``d sin(tau)`` enter, so the formula is evaluated
    exactly in rationals and rounded once; points close to a vertex would
    otherwise lose most of their digits to cancellation.
    """
    if not a > 0:
        raise ValueError("a must be positive")
    cx, cy, px, py, vx, vy, A = (Fraction(v) for v in (*center, *third, *vertex, a))
    dx, dy, ex, ey = px - cx, py - cy, vx - cx, vy - cy
    d_sq = dx * dx + dy * dy
    e_sq = ex * ex + ey * ey
    a_sq = A * A
    if d_sq == 0 or d_sq > a_sq or e_sq == 0:
        return None
    # (d cos tau)^2, tau being the angle at the centre between third point and vertex
    along_sq = (dx * ex + dy * ey) ** 2 / e_sq
    denom = a_sq - along_sq
    if denom <= 0:
        return None
    b_sq = a_sq * (d_sq - along_sq) / denom
    if b_sq <= 0:
        return None
    return math.sqrt(b_sq)


def minor_axis_votes(center, a, points, vertex) -> np.ndarray:
    """Vectorised :func:`vote_minor_axis`.

    ``center``/``vertex`` are (..., 2) arrays, ``a`` has shape (...,), and
    ``points`` is (n, 2); the result has shape (..., n) with NaN where no
    vote is cast.
    """
    center = np.asarray(center, dtype=float)
    vertex = np.asarray(vertex, dtype=float)
    a = np.asarray(a, dtype=float)[..., None]
    px = np.asarray(points, dtype=float)[:, 0]
    py = np.asarray(points, dtype=float)[:, 1]
    dx = px - center[..., 0:1]
    dy = py - center[..., 1:2]
    ex = vertex[..., 0:1] - center[..., 0:1]
    ey = vertex[..., 1:2] - center[..., 1:2]
    d_sq = dx * dx + dy * dy
    e = np.sqrt(ex * ex + ey * ey)
    with np.errstate(invalid="ignore", divide="ignore"):
        along = (dx * ex + dy * ey) / e
        across = (dx * ey - dy * ex) / e
        denom = (a - along) * (a + along)
        b_sq = a * a * across * across / denom
        ok = (d_sq > 0) & (d_sq <= a * a) & (e > 0) & (denom > 0) & (b_sq > 0)
        return np.where(ok, np.sqrt(np.where(ok, b_sq, 1.0)), np.nan)


def _accumulate(pairs_xy: np.ndarray, pair_idx: np.ndarray, points: np.ndarray, config: DetectionConfig):
    """Accumulator peaks for a batch of pairs.

    Returns (x0, y0, a, alpha, peak_b, peak_votes) arrays, one entry per pair.
    """
    p1 = pairs_xy[:, 0, :]
    p2 = pairs_xy[:, 1, :]
    center = (p1 + p2) / 2
    a = np.hypot(p2[:, 0] - p1[:, 0], p2[:, 1] - p1[:, 1]) / 2
    alpha = np.mod(np.arctan2(p2[:, 1] - p1[:, 1], p2[:, 0] - p1[:, 0]), np.pi)
    alpha = np.where(p2[:, 0] == p1[:, 0], np.pi / 2, alpha)

    b = minor_axis_votes(center, a, points, p2)
    # the pair's own endpoints never vote
    rows = np.arange(len(pairs_xy))
    for col in (0, 1):
        has = pair_idx[:, col] >= 0
        b[rows[has], pair_idx[has, col]] = np.nan
    valid = (b >= config.b_min) & (b <= a[:, None])

    w = config.accumulator_bin_width
    nbins = int(math.floor(config.a_max / w)) + 1
    k = np.floor(np.where(valid, b, 0.0) / w).astype(np.int64)
    flat = (rows[:, None] * nbins + k)[valid]
    hist = np.bincount(flat, minlength=len(pairs_xy) * nbins).reshape(len(pairs_xy), nbins)
    peak_k = np.argmax(hist, axis=1)
    votes = hist[rows, peak_k]
    peak_b = np.minimum((peak_k + 0.5) * w, a)
    return center[:, 0], center[:, 1], a, alpha, peak_b, votes


def _as_ellipse(x0, y0, a, alpha, b, votes, config: DetectionConfig) -> Optional[Ellipse]:
    if votes < config.quality_threshold or votes == 0:
        return None
    if b < config.b_min or b > a:
        return None
    return Ellipse(float(x0), float(y0), float(a), float(b), float(alpha), int(votes))


def detect_candidate(pair: VertexPair, edges: EdgeMap, config: DetectionConfig) -> Optional[Ellipse]:
    """Run the minor-axis accumulator for one vertex pair.

    Every edge point other than the pair votes; the fullest bin gives the
    half minor axis (bin centre, capped at ``a``) and its vote count is
    the candidate's quality. The edge map is never modified.
    """
    pts = edges.points
    pair_idx = []
    for p in pair:
        hit = np.nonzero((pts[:, 0] == p[0]) & (pts[:, 1] == p[1]))[0]
        pair_idx.append(int(hit[0]) if len(hit) else -1)
    xy = np.array([[pair.p1, pair.p2]], dtype=float)
    x0, y0, a, alpha, b, votes = _accumulate(xy, np.array([pair_idx]), pts.astype(float), config)
    return _as_ellipse(x0[0], y0[0], a[0], alpha[0], b[0], votes[0], config)


def contour_census(candidate: Ellipse, edges: EdgeMap, tolerance: float):
    """Edge points within ``tolerance`` px of the contour, split by major-axis side.

    Returns ``(above, below)`` counts; points exactly on the axis line are
    in neither.
    """
    u, v = _contour_points(candidate, edges, tolerance)
    return int(np.sum(v > 0)), int(np.sum(v < 0))


def _contour_points(candidate: Ellipse, edges: EdgeMap, tolerance: float):
    """Local (u, v) coordinates of edge points near the candidate contour."""
    pts = edges.points
    xmin, ymin, xmax, ymax = candidate.bounding_box()
    box = (
        (pts[:, 0] >= xmin - tolerance)
        & (pts[:, 0] <= xmax + tolerance)
        & (pts[:, 1] >= ymin - tolerance)
        & (pts[:, 1] <= ymax + tolerance)
    )
    near = pts[box]
    if len(near) == 0:
        return np.zeros(0), np.zeros(0)
    on = distance_to_ellipse(candidate, near[:, 0], near[:, 1]) <= tolerance
    u, v = candidate.to_local(near[on, 0], near[on, 1])
    # points on an axis line belong to neither side despite round-off
    snap = 1e-9 * candidate.a
    return np.where(np.abs(u) < snap, 0.0, u), np.where(np.abs(v) < snap, 0.0, v)


def _balanced(pos: int, neg: int, ratio: float) -> bool:
    if pos == 0 or neg == 0:
        return False
    return min(pos, neg) / max(pos, neg) >= ratio


def side_counts(candidate: Ellipse, edges: EdgeMap, tolerance: float):
    """Contour support split both ways.

    Returns ``((above, below), (left, right))``: counts on either side of
    the major-axis line and on either side of the minor-axis line.
    """
    u, v = _contour_points(candidate, edges, tolerance)
    return (int(np.sum(v > 0)), int(np.sum(v < 0))), (int(np.sum(u < 0)), int(np.sum(u > 0)))


def filter_candidate(candidate: Ellipse, edges: EdgeMap, config: DetectionConfig) -> bool:
    """Reject candidates whose contour support is lopsided.

    Support must be present on both sides of the major axis with the
    smaller side at least ``side_balance_min`` of the larger. The same
    ratio is required between the two halves cut by the minor axis, which
    throws out ellipses that borrow one end of a real contour and stretch
    toward a stray point.
    """
    (above, below), (left, right) = side_counts(candidate, edges, config.contour_tolerance)
    ratio = config.side_balance_min
    return _balanced(above, below, ratio) and _balanced(left, right, ratio)


def _accept(cand: Ellipse, edges: EdgeMap, config: DetectionConfig) -> bool:
    # side balance, then the same quality bar applied to the contour census
    (above, below), (left, right) = side_counts(cand, edges, config.contour_tolerance)
    ratio = config.side_balance_min
    if not (_balanced(above, below, ratio) and _balanced(left, right, ratio)):
        return False
    return above + below >= config.quality_threshold


_BATCH = 64


def detect_all(edges: EdgeMap, config: DetectionConfig, rng=None):
    """Sample pairs, accumulate, filter.

    Returns the accepted (pre-clustering) ellipses in sampling order and a
    :class:`RunStats` with ``real_ellipses`` left at 0 for the clustering
    stage to fill in.
    """
    n = len(edges)
    if n == 0:
        raise NoEdgesError("edge map is empty; nothing to sample")
    if rng is None:
        rng = make_rng(config.rng_seed)
    m = config.c_factor * n
    idx = _draw_indices(n, m, rng)
    idx = idx[_admissible(edges.points, idx, config)]
    pts = edges.points
    ptsf = pts.astype(float)

    found = []
    for start in range(0, len(idx), _BATCH):
        chunk = idx[start : start + _BATCH]
        xy = ptsf[chunk]
        x0, y0, a, alpha, b, votes = _accumulate(xy, chunk, ptsf, config)
        for i in np.nonzero(votes >= config.quality_threshold)[0]:
            cand = _as_ellipse(x0[i], y0[i], a[i], alpha[i], b[i], votes[i], config)
            if cand is not None and _accept(cand, edges, config):
                found.append(cand)

    stats = RunStats(
        virtual_ellipses=len(found),
        real_ellipses=0,
        ellipse_quality=config.quality_threshold,
        search_point_pairs=m,
        total_edge_points=n,
    )
    return found, stats
