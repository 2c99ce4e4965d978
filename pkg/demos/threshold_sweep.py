"""
Choosing the binarization level
===============================

The edge threshold maximizes the between-class variance of the rescaled
gradient histogram. Here the criterion is tabulated next to the level
the library picks.
"""

import numpy as np

from rhtellipse import Ellipse, GrayRaster, gradient, max_variance_threshold
from rhtellipse.preprocess import denoise, histogram, rescale

yy, xx = np.mgrid[0:120, 0:160]
e = Ellipse(80, 60, 45, 30, 0.3)
u, v = e.to_local(xx, yy)
img = np.where((u / e.a) ** 2 + (v / e.b) ** 2 <= 1, 180, 60) + np.random.default_rng(1).normal(0, 8, xx.shape)
raster = GrayRaster(np.clip(img, 0, 255).astype(np.uint8))

hist = np.asarray(histogram(rescale(gradient(denoise(raster)))), dtype=float)
levels = np.arange(256)
w0 = np.cumsum(hist)
s0 = np.cumsum(hist * levels)
n, mass = hist.sum(), s0[-1]
w1 = n - w0
# proportional to w0 * w1 * (mu0 - mu1)^2
with np.errstate(divide="ignore", invalid="ignore"):
    score = np.where((w0 > 0) & (w1 > 0), (s0 * n - mass * w0) ** 2 / (w0 * w1), 0)

t = max_variance_threshold(hist.astype(int)).value
print(f"chosen level {t}; {int(hist[t + 1:].sum())} of {int(hist.sum())} pixels become edges")
print(f"best tabulated level {int(np.argmax(score))}")
for k in range(0, 256, 16):
    bar = "#" * int(40 * score[k] / score.max())
    print(f"{k:3d} {bar}")
