"""
From virtual to real ellipses
=============================

A thick contour attracts many near-identical detections. This script
shows the single-pass clustering that folds them into one output per
physical ellipse.
"""

import numpy as np

from rhtellipse import DetectionConfig, cluster_ellipses, detect_all, distance, representatives
from rhtellipse.synth import rasterize, twin_scene

spec = twin_scene(seed=3)
edges = rasterize(spec)
virtual, stats = detect_all(edges, DetectionConfig(rng_seed=0))
print(f"{stats.total_edge_points} edge points, {stats.search_point_pairs} pairs, {len(virtual)} virtual ellipses")

clusters = cluster_ellipses(virtual, d_threshold=20)
for k, (c, rep) in enumerate(zip(clusters, representatives(clusters))):
    spread = max(distance(m, c.centroid) for m in c.members)
    print(f"cluster {k}: {len(c.members)} members, widest member {spread:.1f} from the centroid")
    print("  centroid      ", np.round(c.centroid, 2))
    print("  representative", np.round(rep.features, 2))

print("truth")
for e in spec.ellipses:
    print("  ", np.round(e.features, 2))
