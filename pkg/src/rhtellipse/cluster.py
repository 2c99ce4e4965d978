"""Single-pass clustering of detected ellipses.

Near-duplicate detections of one physical contour are grouped by Euclidean
distance between (x0, y0, a, b, alpha) feature vectors. Each ellipse joins
the nearest cluster whose running centroid is within the threshold, or
starts a new cluster. The output ellipse of a cluster is the member
closest to the final centroid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Ellipse

DEFAULT_THRESHOLD = 20.0


def distance(v, w, wrap_alpha: bool = False) -> float:
    """Euclidean distance between two 5-component feature vectors.

    Components are compared raw, pixels and radians alike. With
    ``wrap_alpha`` the orientation difference is taken modulo pi instead.
    """
    v = np.asarray(v.features if isinstance(v, Ellipse) else v, dtype=float)
    w = np.asarray(w.features if isinstance(w, Ellipse) else w, dtype=float)
    if v.shape != (5,) or w.shape != (5,):
        raise ValueError("feature vectors have exactly 5 components")
    diff = v - w
    if wrap_alpha:
        g = abs(diff[4]) % math.pi
        diff[4] = min(g, math.pi - g)
    return math.hypot(*diff.tolist())


@dataclass
class Cluster:
    members: list = field(default_factory=list)
    centroid: np.ndarray = None
    # distance to the pre-update centroid at each join (0.0 for the seed)
    certificates: list = field(default_factory=list)

    def add(self, e: Ellipse, dist: float = 0.0) -> None:
        n = len(self.members)
        if n == 0:
            self.centroid = e.features
        else:
            self.centroid = self.centroid + (e.features - self.centroid) / (n + 1)
        self.members.append(e)
        self.certificates.append(dist)


def cluster_ellipses(virtual, d_threshold: float = DEFAULT_THRESHOLD, wrap_alpha: bool = False) -> list:
    """Group ellipses in one pass, in input order."""
    if not d_threshold > 0:
        raise ValueError("d_threshold must be positive")
    clusters = []
    for e in virtual:
        best, best_d = None, math.inf
        for c in clusters:
            d = distance(e.features, c.centroid, wrap_alpha)
            if d <= d_threshold and d < best_d:
                best, best_d = c, d
        if best is None:
            best = Cluster()
            clusters.append(best)
            best.add(e)
        else:
            best.add(e, best_d)
    return clusters


def representatives(clusters, wrap_alpha: bool = False) -> list:
    """Member nearest each cluster's centroid; earliest member wins ties."""
    out = []
    for c in clusters:
        dists = [distance(m.features, c.centroid, wrap_alpha) for m in c.members]
        out.append(c.members[int(np.argmin(dists))])
    return out
