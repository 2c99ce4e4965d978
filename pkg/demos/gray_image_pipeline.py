"""
Detecting ellipses in a gray image
==================================

Two filled ellipses on a noisy background go through the whole chain:
smoothing, gradient, maximum-variance binarization, randomized Hough
voting and clustering. The same run is then repeated through the
command-line driver, which writes the result tables to disk.
"""

import tempfile
from pathlib import Path

import numpy as np

from rhtellipse import DetectionConfig, Ellipse, GrayRaster, edge_map, write_gray_image
from rhtellipse.cli import detect, main
from rhtellipse.raster_io import write_results

# paint the scene: two filled shapes at different brightness plus sensor noise
truth = [Ellipse(90, 115, 60, 38, 0.5), Ellipse(235, 125, 55, 40, 2.2)]
yy, xx = np.mgrid[0:240, 0:320]
img = np.full((240, 320), 40.0)
for e, level in zip(truth, (200, 150)):
    u, v = e.to_local(xx, yy)
    img[(u / e.a) ** 2 + (v / e.b) ** 2 <= 1] = level
img += np.random.default_rng(0).normal(0, 6, img.shape)
raster = GrayRaster(np.clip(img, 0, 255).astype(np.uint8))

# the front end turns brightness steps into a thin edge map
edges = edge_map(raster)
print(f"{len(edges)} edge points")

# detection runs on the edge map alone; clustering merges duplicate hits
found, stats, virtual = detect(edges, DetectionConfig(rng_seed=0))
print(write_results(found, stats))

print("ground truth")
print(write_results(truth))

# the command-line driver does the same and writes files next to the image
with tempfile.TemporaryDirectory() as tmp:
    image = Path(tmp) / "scene.pgm"
    image.write_bytes(write_gray_image(raster))
    main(["--input", str(image), "--out-prefix", str(Path(tmp) / "scene"), "--stats", "--overlay"])
    print((Path(tmp) / "scene.stats.csv").read_text())
