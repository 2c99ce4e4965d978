"""Portable graymap/pixmap I/O, overlays and result tables.

Only 8-bit netpbm images are handled: ASCII graymaps (P2), binary graymaps
(P5) and binary pixmaps (P6, converted to gray by unweighted channel mean).
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, TruncatedError, UnsupportedError
from .geometry import Ellipse, distance_to_ellipse

ELLIPSE_COLUMNS = ("center-x", "center-y", "major-axis", "minor-axis", "alpha(rad)")
STATS_COLUMNS = (
    "virtual-ellipses",
    "real-ellipses",
    "ellipse-quality",
    "search-point-pairs",
    "total-edge-points",
)


@dataclass(frozen=True, eq=False)
class GrayRaster:
    """8-bit luminance image stored as a (height, width) uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"expected a non-empty 2-D array, got shape {px.shape}")
        if px.dtype != np.uint8:
            if px.size and (px.min() < 0 or px.max() > 255):
                raise ValueError("samples must lie in [0, 255]")
            px = px.astype(np.uint8)
        px = px.copy()
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def samples(self) -> np.ndarray:
        """Row-major flat view of the samples."""
        return self.pixels.ravel()

    def __eq__(self, other):
        if not isinstance(other, GrayRaster):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )


@dataclass(frozen=True, eq=False)
class EdgeMap:
    """Binary edge image held as a list of foreground (x, y) coordinates.

    Points are de-duplicated and kept in row-major order so that two maps
    with the same foreground are indistinguishable, whatever order the
    points were supplied in.
    """

    width: int
    height: int
    points: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("edge map dimensions must be positive")
        pts = np.asarray(self.points, dtype=np.int64).reshape(-1, 2)
        if len(pts):
            x, y = pts[:, 0], pts[:, 1]
            if x.min() < 0 or y.min() < 0 or x.max() >= self.width or y.max() >= self.height:
                raise ValueError("edge point outside the frame")
            lin = np.unique(y * self.width + x)
            pts = np.column_stack((lin % self.width, lin // self.width))
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_mask(cls, mask) -> EdgeMap:
        mask = np.asarray(mask, dtype=bool)
        ys, xs = np.nonzero(mask)
        return cls(mask.shape[1], mask.shape[0], np.column_stack((xs, ys)))

    @classmethod
    def from_raster(cls, raster: GrayRaster) -> EdgeMap:
        """Treat every nonzero sample as foreground."""
        return cls.from_mask(raster.pixels > 0)

    def to_mask(self) -> np.ndarray:
        mask = np.zeros((self.height, self.width), dtype=bool)
        mask[self.points[:, 1], self.points[:, 0]] = True
        return mask

    def to_raster(self) -> GrayRaster:
        return GrayRaster(self.to_mask().astype(np.uint8) * 255)

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        if not isinstance(other, EdgeMap):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and np.array_equal(self.points, other.points)
        )


_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _header(data: bytes, count: int):
    """Pull ``count`` whitespace-separated tokens, skipping ``#`` comments."""
    tokens = []
    pos = 0
    for _ in range(count):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise FormatError("incomplete header")
        tokens.append(m.group(1))
        pos = m.end()
    return tokens, pos


def read_gray_image(data: bytes) -> GrayRaster:
    """Decode a P2, P5 or P6 image into a gray raster.

    Raises
    ------
    FormatError
        Unknown magic number or malformed header fields.
    TruncatedError
        Fewer samples than ``width * height`` (times 3 for P6).
    UnsupportedError
        ``maxval`` other than 255.
    """
    data = bytes(data)
    magic = data[:2]
    if magic not in (b"P2", b"P5", b"P6"):
        raise FormatError(f"unsupported magic number {magic!r}")
    (_, w, h, maxval), pos = _header(data, 4)
    try:
        width, height, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise FormatError(f"non-numeric header field: {exc}") from None
    if width < 1 or height < 1:
        raise FormatError(f"bad dimensions {width}x{height}")
    if maxval != 255:
        raise UnsupportedError(f"maxval {maxval} not supported, only 255")

    channels = 3 if magic == b"P6" else 1
    count = width * height * channels
    if magic == b"P2":
        body = data[pos:].split()
        if len(body) < count:
            raise TruncatedError(f"expected {count} samples, found {len(body)}")
        try:
            values = np.array([int(t) for t in body[:count]], dtype=np.int64)
        except ValueError:
            raise FormatError("non-numeric sample in ASCII payload") from None
        if values.min() < 0 or values.max() > 255:
            raise FormatError("sample outside [0, maxval]")
    else:
        # exactly one whitespace byte separates maxval from the raster
        if pos >= len(data) or not data[pos : pos + 1].isspace():
            if pos >= len(data) and count > 0:
                raise TruncatedError("missing payload")
            raise FormatError("missing whitespace after maxval")
        payload = data[pos + 1 :]
        if len(payload) < count:
            raise TruncatedError(f"expected {count} bytes, found {len(payload)}")
        values = np.frombuffer(payload[:count], dtype=np.uint8).astype(np.int64)

    if channels == 3:
        rgb = values.reshape(height, width, 3)
        gray = (rgb.sum(axis=2) + 1) // 3
    else:
        gray = values.reshape(height, width)
    return GrayRaster(gray.astype(np.uint8))


def write_gray_image(raster: GrayRaster, binary: bool = True) -> bytes:
    """Encode a raster as P5 (``binary=True``) or P2."""
    h, w = raster.pixels.shape
    if binary:
        return b"P5\n%d %d\n255\n" % (w, h) + raster.pixels.tobytes()
    lines = [f"P2\n{w} {h}\n255"]
    for row in raster.pixels:
        lines.append(" ".join(str(int(v)) for v in row))
    return ("\n".join(lines) + "\n").encode("ascii")


def contour_mask(ellipse: Ellipse, width: int, height: int, half_width: float) -> np.ndarray:
    """Boolean (height, width) mask of pixel centres within ``half_width`` of the contour."""
    mask = np.zeros((height, width), dtype=bool)
    xmin, ymin, xmax, ymax = ellipse.bounding_box()
    x_lo = max(0, math.floor(xmin - half_width))
    x_hi = min(width - 1, math.ceil(xmax + half_width))
    y_lo = max(0, math.floor(ymin - half_width))
    y_hi = min(height - 1, math.ceil(ymax + half_width))
    if x_lo > x_hi or y_lo > y_hi:
        return mask
    ys, xs = np.mgrid[y_lo : y_hi + 1, x_lo : x_hi + 1]
    near = distance_to_ellipse(ellipse, xs, ys) <= half_width
    mask[y_lo : y_hi + 1, x_lo : x_hi + 1] = near
    return mask


def write_overlay(base: GrayRaster, ellipses, stroke: int = 255) -> bytes:
    """Draw ellipse contours over ``base`` and return the P5 encoding.

    A pixel is stroked when its centre is within 0.5 px of a contour.
    Contours leaving the frame are clipped; ``base`` is left untouched.
    """
    out = np.array(base.pixels, copy=True)
    for e in ellipses:
        out[contour_mask(e, base.width, base.height, 0.5)] = stroke
    return write_gray_image(GrayRaster(out))


def _ellipse_row(e: Ellipse):
    return [f"{e.x0:.1f}", f"{e.y0:.1f}", f"{e.a:.0f}", f"{e.b:.0f}", f"{e.alpha:.3f}"]


def _stats_row(stats):
    return [
        str(int(stats.virtual_ellipses)),
        str(int(stats.real_ellipses)),
        str(int(stats.ellipse_quality)),
        str(int(stats.search_point_pairs)),
        str(int(stats.total_edge_points)),
    ]


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def ellipses_csv(ellipses) -> str:
    return _csv(ELLIPSE_COLUMNS, [_ellipse_row(e) for e in ellipses])


def stats_csv(stats) -> str:
    return _csv(STATS_COLUMNS, [_stats_row(stats)])


def write_results(ellipses, stats=None, fmt: str = "csv") -> str:
    """Render the ellipse table and (optionally) the run statistics.

    ``fmt="csv"`` gives the ellipse table, then a blank line and the stats
    table when ``stats`` is given. ``fmt="json"`` gives one object with
    ``ellipses`` and ``stats`` keys. Values are rounded as in the tables:
    centres to 0.1 px, axes to whole pixels, alpha to 3 decimals.
    """
    ellipses = list(ellipses)
    if fmt == "csv":
        text = ellipses_csv(ellipses)
        if stats is not None:
            text += "\n" + stats_csv(stats)
        return text
    if fmt == "json":
        doc = {
            "ellipses": [
                dict(zip(ELLIPSE_COLUMNS, (float(v) for v in _ellipse_row(e))))
                for e in ellipses
            ]
        }
        if stats is not None:
            doc["stats"] = dict(zip(STATS_COLUMNS, (int(v) for v in _stats_row(stats))))
        return json.dumps(doc, indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def read_results(text: str, fmt: str = "csv"):
    """Parse text produced by :func:`write_results`.

    Returns ``(rows, stats)`` where ``rows`` is a list of 5-float tuples and
    ``stats`` a 5-int tuple or None.
    """
    if fmt == "json":
        doc = json.loads(text)
        rows = [tuple(float(r[c]) for c in ELLIPSE_COLUMNS) for r in doc["ellipses"]]
        stats = doc.get("stats")
        if stats is not None:
            stats = tuple(int(stats[c]) for c in STATS_COLUMNS)
        return rows, stats
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    blocks = text.split("\n\n")
    table = list(csv.reader(io.StringIO(blocks[0])))
    if tuple(table[0]) != ELLIPSE_COLUMNS:
        raise FormatError("unexpected ellipse table header")
    rows = [tuple(float(v) for v in r) for r in table[1:] if r]
    stats = None
    if len(blocks) > 1 and blocks[1].strip():
        st = list(csv.reader(io.StringIO(blocks[1])))
        if tuple(st[0]) != STATS_COLUMNS:
            raise FormatError("unexpected stats table header")
        stats = tuple(int(v) for v in st[1])
    return rows, stats
