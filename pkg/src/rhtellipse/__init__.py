"""Ellipse detection with a Randomized Hough Transform and result clustering."""

from .cluster import Cluster, cluster_ellipses, distance, representatives
from .detector import (
    DetectionConfig,
    MinorAxisAccumulator,
    RunStats,
    VertexPair,
    detect_all,
    detect_candidate,
    filter_candidate,
    params_from_vertices,
    sample_pairs,
    vote_minor_axis,
)
from .errors import (
    ConfigError,
    EmptyHistogramError,
    FormatError,
    NoEdgesError,
    RHTError,
    TooSmallError,
    TruncatedError,
    UnsupportedError,
)
from .geometry import Ellipse, distance_to_ellipse
from .preprocess import GradientRaster, Threshold, binarize, denoise, edge_map, gradient, max_variance_threshold
from .raster_io import EdgeMap, GrayRaster, read_gray_image, write_gray_image, write_overlay, write_results

__version__ = "0.1.0"

__all__ = [
    "binarize",
    "Cluster",
    "cluster_ellipses",
    "ConfigError",
    "denoise",
    "detect_all",
    "detect_candidate",
    "DetectionConfig",
    "distance",
    "distance_to_ellipse",
    "edge_map",
    "EdgeMap",
    "Ellipse",
    "EmptyHistogramError",
    "filter_candidate",
    "FormatError",
    "gradient",
    "GradientRaster",
    "GrayRaster",
    "max_variance_threshold",
    "MinorAxisAccumulator",
    "NoEdgesError",
    "params_from_vertices",
    "read_gray_image",
    "representatives",
    "RHTError",
    "RunStats",
    "sample_pairs",
    "Threshold",
    "TooSmallError",
    "TruncatedError",
    "UnsupportedError",
    "VertexPair",
    "vote_minor_axis",
    "write_gray_image",
    "write_overlay",
    "write_results",
]

