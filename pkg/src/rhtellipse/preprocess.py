"""Front end of the detector: smoothing, Sobel gradient, Otsu binarisation.

All operators use clamped (edge-replicated) borders so output size equals
input size, and all arithmetic is done in integers so results are exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyHistogramError, TooSmallError
from .raster_io import EdgeMap, GrayRaster

GAUSS_3X3 = np.array([[1, 2, 1], [2, 4, 2], [1, 2, 1]], dtype=np.int64)
SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.int64)
SOBEL_Y = SOBEL_X.T


@dataclass(frozen=True, eq=False)
class GradientRaster:
    """Per-pixel gradient strength, a (height, width) non-negative int array."""

    magnitudes: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.magnitudes)
        if m.ndim != 2:
            raise ValueError("magnitudes must be 2-D")
        if m.size and m.min() < 0:
            raise ValueError("magnitudes must be non-negative")
        object.__setattr__(self, "magnitudes", m.astype(np.int64))

    @property
    def width(self) -> int:
        return self.magnitudes.shape[1]

    @property
    def height(self) -> int:
        return self.magnitudes.shape[0]


@dataclass(frozen=True)
class Threshold:
    value: int

    def __post_init__(self):
        if not 0 <= self.value <= 255:
            raise ValueError(f"threshold {self.value} outside [0, 255]")


def _correlate3(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    padded = np.pad(img.astype(np.int64), 1, mode="edge")
    h, w = img.shape
    out = np.zeros((h, w), dtype=np.int64)
    for dy in range(3):
        for dx in range(3):
            k = kernel[dy, dx]
            if k:
                out += k * padded[dy : dy + h, dx : dx + w]
    return out


def denoise(raster: GrayRaster) -> GrayRaster:
    """3x3 binomial (Gaussian) smoothing, rounded half up."""
    acc = _correlate3(raster.pixels, GAUSS_3X3)
    return GrayRaster(((acc + 8) // 16).astype(np.uint8))


def gradient(raster: GrayRaster) -> GradientRaster:
    """Sobel gradient strength ``|Gx| + |Gy|``.

    Raises TooSmallError for rasters under 3x3.
    """
    if raster.width < 3 or raster.height < 3:
        raise TooSmallError(f"need at least 3x3, got {raster.width}x{raster.height}")
    gx = _correlate3(raster.pixels, SOBEL_X)
    gy = _correlate3(raster.pixels, SOBEL_Y)
    return GradientRaster(np.abs(gx) + np.abs(gy))


def rescale(grad: GradientRaster) -> np.ndarray:
    """Map magnitudes linearly onto 0..255, rounding up.

    Rounding up keeps every nonzero magnitude nonzero, and makes
    ``level > t`` equivalent to ``magnitude * 255 / max > t`` for integer t.
    """
    m = grad.magnitudes
    peak = int(m.max()) if m.size else 0
    if peak == 0:
        return np.zeros(m.shape, dtype=np.int64)
    return (m * 255 + peak - 1) // peak


def histogram(levels) -> np.ndarray:
    """256-bin histogram of integer levels."""
    return np.bincount(np.asarray(levels, dtype=np.int64).ravel(), minlength=256)[:256]


def max_variance_threshold(hist) -> Threshold:
    """Otsu's level: the split {<= t} / {> t} with largest between-class variance.

    The comparison is exact (integer arithmetic), so ties resolve to the
    smallest t. A histogram with a single occupied level has zero
    between-class variance everywhere and yields 0.

    Raises EmptyHistogramError when every bin is zero.
    """
    h = [int(c) for c in np.asarray(hist).ravel()]
    if len(h) != 256:
        raise ValueError(f"expected 256 bins, got {len(h)}")
    if any(c < 0 for c in h):
        raise ValueError("negative bin count")
    total = sum(h)
    if total == 0:
        raise EmptyHistogramError("histogram has no mass")
    total_sum = sum(i * c for i, c in enumerate(h))

    # sigma_b^2 * N^2 = (S0*N - S*W0)^2 / (W0*W1)
    best_t, best_num, best_den = 0, 0, 1
    w0 = s0 = 0
    for t in range(256):
        w0 += h[t]
        s0 += t * h[t]
        w1 = total - w0
        if w0 == 0 or w1 == 0:
            continue
        num = (s0 * total - total_sum * w0) ** 2
        den = w0 * w1
        if num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return Threshold(best_t)


def binarize(grad: GradientRaster, threshold: Threshold) -> EdgeMap:
    """Foreground = pixels whose rescaled magnitude exceeds the threshold."""
    return EdgeMap.from_mask(rescale(grad) > threshold.value)


def edge_map(raster: GrayRaster) -> EdgeMap:
    """Full front end: denoise, gradient, Otsu level on the rescaled gradient, binarise."""
    grad = gradient(denoise(raster))
    t = max_variance_threshold(histogram(rescale(grad)))
    return binarize(grad, t)
