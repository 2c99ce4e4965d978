"""Synthetic ground-truth scenes: generation, rasterisation, grading.

Scenes are edge maps made of thick ellipse contours plus uniform clutter.
They stand in for real photographs in the detector tests, and grading is
done on ellipse parameters (never on pixels) so a detector bug cannot
certify itself through the shared contour predicate.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Ellipse
from .raster_io import EdgeMap, contour_mask


@dataclass(frozen=True)
class SceneSpec:
    width: int
    height: int
    ellipses: tuple = ()
    clutter_points: int = 0
    contour_thickness: float = 1.0
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "ellipses", tuple(self.ellipses))
        problem = scene_problem(self)
        if problem:
            raise ValueError(problem)

    def to_json(self) -> str:
        doc = {
            "width": self.width,
            "height": self.height,
            "clutter_points": self.clutter_points,
            "contour_thickness": self.contour_thickness,
            "rng_seed": self.rng_seed,
            "ellipses": [
                {"x0": e.x0, "y0": e.y0, "a": e.a, "b": e.b, "alpha": e.alpha} for e in self.ellipses
            ],
        }
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> SceneSpec:
        doc = json.loads(text)
        ellipses = [Ellipse(e["x0"], e["y0"], e["a"], e["b"], e["alpha"]) for e in doc.get("ellipses", [])]
        return cls(
            width=int(doc["width"]),
            height=int(doc["height"]),
            ellipses=tuple(ellipses),
            clutter_points=int(doc.get("clutter_points", 0)),
            contour_thickness=float(doc.get("contour_thickness", 1.0)),
            rng_seed=int(doc.get("rng_seed", 0)),
        )


def _fits(e: Ellipse, width, height, margin) -> bool:
    xmin, ymin, xmax, ymax = e.bounding_box()
    return xmin >= margin and ymin >= margin and xmax <= width - 1 - margin and ymax <= height - 1 - margin


def _apart(e: Ellipse, f: Ellipse, margin) -> bool:
    # disjoint circumscribed circles, so the contours cannot touch
    return math.hypot(e.x0 - f.x0, e.y0 - f.y0) > e.a + f.a + 2 * margin


def scene_problem(spec: SceneSpec):
    """Describe why ``spec`` is invalid, or return None."""
    if spec.width < 1 or spec.height < 1:
        return "scene dimensions must be positive"
    if spec.clutter_points < 0:
        return "clutter_points must be non-negative"
    if spec.contour_thickness <= 0:
        return "contour_thickness must be positive"
    for i, e in enumerate(spec.ellipses):
        if not _fits(e, spec.width, spec.height, spec.contour_thickness):
            return f"ellipse {i} does not fit in the frame with margin {spec.contour_thickness}"
        for j in range(i):
            if not _apart(e, spec.ellipses[j], spec.contour_thickness):
                return f"ellipses {j} and {i} are too close"
    return None


def contour_pixels(e: Ellipse, width, height, thickness) -> np.ndarray:
    """Mask of pixels whose centre lies within ``thickness / 2`` of the contour."""
    return contour_mask(e, width, height, thickness / 2)


def rasterize(spec: SceneSpec) -> EdgeMap:
    """Render the scene's contours and clutter into an edge map.

    Clutter pixels are drawn uniformly over the frame from the scene's
    seed; draws landing on an occupied pixel are redrawn so exactly
    ``clutter_points`` extra pixels are added (capped by free space).
    """
    mask = np.zeros((spec.height, spec.width), dtype=bool)
    for e in spec.ellipses:
        mask |= contour_pixels(e, spec.width, spec.height, spec.contour_thickness)

    rng = np.random.default_rng(spec.rng_seed)
    want = min(spec.clutter_points, int(mask.size - mask.sum()))
    added = 0
    while added < want:
        xs = rng.integers(0, spec.width, size=want - added)
        ys = rng.integers(0, spec.height, size=want - added)
        for x, y in zip(xs, ys):
            if not mask[y, x]:
                mask[y, x] = True
                added += 1
    return EdgeMap.from_mask(mask)


def random_scene(
    seed: int,
    width: int = 320,
    height: int = 240,
    count=(1, 3),
    a_range=(15.0, 70.0),
    b_min: float = 8.0,
    thickness: float = 2.0,
    clutter: int = 150,
    min_contour_pixels: int = 200,
    max_tries: int = 1000,
) -> SceneSpec:
    """Draw a random valid scene.

    Ellipse count is uniform in ``count`` (inclusive), ``a`` uniform in
    ``a_range``, ``b`` uniform in ``[b_min, a)``, orientation uniform in
    [0, pi) and centres uniform over the positions that fit. An ellipse
    is redrawn until it fits the frame, keeps clear of the others and has
    at least ``min_contour_pixels`` rendered contour pixels.
    """
    rng = np.random.default_rng(seed)
    k = int(rng.integers(count[0], count[1] + 1))
    chosen = []
    for _ in range(k):
        for _ in range(max_tries):
            a = float(rng.uniform(*a_range))
            if a <= b_min:
                continue
            b = float(rng.uniform(b_min, a))
            alpha = float(rng.uniform(0, math.pi))
            x0 = float(rng.uniform(0, width))
            y0 = float(rng.uniform(0, height))
            e = Ellipse(x0, y0, a, b, alpha)
            if not _fits(e, width, height, thickness):
                continue
            if not all(_apart(e, f, thickness) for f in chosen):
                continue
            if min_contour_pixels and contour_pixels(e, width, height, thickness).sum() < min_contour_pixels:
                continue
            chosen.append(e)
            break
        else:
            raise RuntimeError(f"could not place ellipse {len(chosen)} after {max_tries} tries")
    return SceneSpec(width, height, tuple(chosen), clutter, thickness, int(rng.integers(0, 2**63)))


def twin_scene(
    seed: int,
    width: int = 320,
    height: int = 240,
    a_range=(45.0, 60.0),
    aspect=(0.5, 0.8),
    thickness: float = 5.0,
    clutter: int = 150,
) -> SceneSpec:
    """Two clearly elliptical contours, one in each half of the frame.

    Each ellipse sits near the centre of its half (jitter +-5 px in x,
    +-15 px in y) with ``a`` uniform in ``a_range``, ``b/a`` uniform in
    ``aspect`` and random orientation. The thick contours mimic a
    thresholded gradient image.
    """
    rng = np.random.default_rng(seed)
    ellipses = []
    for cx in (width / 4, 3 * width / 4):
        a = float(rng.uniform(*a_range))
        b = a * float(rng.uniform(*aspect))
        alpha = float(rng.uniform(0, math.pi))
        x0 = cx + float(rng.uniform(-5, 5))
        y0 = height / 2 + float(rng.uniform(-15, 15))
        ellipses.append(Ellipse(x0, y0, a, b, alpha))
    return SceneSpec(width, height, tuple(ellipses), clutter, thickness, int(rng.integers(0, 2**63)))


@dataclass(frozen=True)
class Tolerance:
    center: float = 2.0
    axes: float = 3.0
    alpha: float = 0.1


@dataclass
class GradeResult:
    matched: int
    false_positives: int
    # (truth index, detected index, |dx|, |dy|, |da|, |db|, dalpha) per match
    errors: list = field(default_factory=list)


def angle_gap(p: float, q: float) -> float:
    """Orientation difference modulo pi, in [0, pi/2]."""
    g = abs(p - q) % math.pi
    return min(g, math.pi - g)


def grade(detected, truth, tol: Tolerance = Tolerance()) -> GradeResult:
    """Greedy one-to-one matching of detections to ground truth.

    Admissible pairs (all component errors within ``tol``) are matched in
    increasing feature distance order. Unmatched detections count as
    false positives; unmatched truth ellipses are simply missed.
    """
    detected = list(detected)
    truth = list(truth)
    cands = []
    for ti, t in enumerate(truth):
        for di, d in enumerate(detected):
            dx, dy = abs(d.x0 - t.x0), abs(d.y0 - t.y0)
            da, db = abs(d.a - t.a), abs(d.b - t.b)
            dal = angle_gap(d.alpha, t.alpha)
            if dx <= tol.center and dy <= tol.center and da <= tol.axes and db <= tol.axes and dal <= tol.alpha:
                cands.append((math.sqrt(dx * dx + dy * dy + da * da + db * db + dal * dal), ti, di, (dx, dy, da, db, dal)))
    cands.sort(key=lambda c: (c[0], c[1], c[2]))
    used_t, used_d, errors = set(), set(), []
    for _, ti, di, err in cands:
        if ti in used_t or di in used_d:
            continue
        used_t.add(ti)
        used_d.add(di)
        errors.append((ti, di) + err)
    return GradeResult(len(errors), len(detected) - len(used_d), errors)
