"""Command-line pipeline driver.

    rhtellipse --input scene.pgm --out-prefix out/scene --seed 7 --stats --overlay

Reads a netpbm image, runs the preprocessing front end (unless
``--edges-only``), detects and clusters ellipses, and writes
``<prefix>.ellipses.csv``, ``<prefix>.report.json`` and optionally
``<prefix>.stats.csv`` and ``<prefix>.overlay.pgm``.

Exit codes: 0 ok, 2 input/format error, 3 empty edge map, 4 bad configuration.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field, fields

from . import cluster, preprocess
from .detector import DetectionConfig, detect_all
from .errors import ConfigError, FormatError, NoEdgesError, TooSmallError
from .raster_io import EdgeMap, ellipses_csv, read_gray_image, stats_csv, write_overlay, write_results

EXIT_OK = 0
EXIT_FORMAT = 2
EXIT_NO_EDGES = 3
EXIT_CONFIG = 4


@dataclass
class PipelineConfig:
    input: str
    out_prefix: str
    detection: DetectionConfig = field(default_factory=DetectionConfig)
    d_threshold: float = cluster.DEFAULT_THRESHOLD
    emit_overlay: bool = False
    emit_stats: bool = False
    skip_preprocess: bool = False

    def __post_init__(self):
        if not self.d_threshold > 0:
            raise ConfigError(f"d_threshold must be positive, got {self.d_threshold}")


@dataclass
class PipelineResult:
    ellipses: list
    stats: object
    virtual: list
    edges: EdgeMap
    outputs: dict


class PipelineError(Exception):
    def __init__(self, code: int, stage: str, message: str):
        super().__init__(message)
        self.code = code
        self.stage = stage

    def as_json(self) -> str:
        return json.dumps({"error": type(self.__cause__ or self).__name__, "stage": self.stage, "message": str(self)})


def _atomic_write(path: str, data: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def detect(edges: EdgeMap, config: DetectionConfig, d_threshold: float = cluster.DEFAULT_THRESHOLD):
    """Detector plus clustering on an edge map.

    Returns ``(real, stats, virtual)`` with ``stats.real_ellipses`` filled.
    """
    virtual, stats = detect_all(edges, config)
    real = cluster.representatives(cluster.cluster_ellipses(virtual, d_threshold))
    stats.real_ellipses = len(real)
    return real, stats, virtual


def run_pipeline(config: PipelineConfig) -> PipelineResult:
    """Run every stage and write the output files.

    Raises PipelineError carrying the exit code and failing stage. Nothing
    is written unless all stages succeed.
    """
    try:
        with open(config.input, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise PipelineError(EXIT_FORMAT, "read", f"cannot read {config.input}: {exc.strerror}") from exc
    try:
        raster = read_gray_image(data)
    except FormatError as exc:
        raise PipelineError(EXIT_FORMAT, "read", str(exc)) from exc

    if config.skip_preprocess:
        edges = EdgeMap.from_raster(raster)
    else:
        try:
            edges = preprocess.edge_map(raster)
        except TooSmallError as exc:
            raise PipelineError(EXIT_FORMAT, "preprocess", str(exc)) from exc

    try:
        real, stats, virtual = detect(edges, config.detection, config.d_threshold)
    except NoEdgesError as exc:
        raise PipelineError(EXIT_NO_EDGES, "detect", str(exc)) from exc

    prefix = config.out_prefix
    outputs = {
        f"{prefix}.ellipses.csv": ellipses_csv(real).encode(),
        f"{prefix}.report.json": write_results(real, stats, fmt="json").encode(),
    }
    if config.emit_stats:
        outputs[f"{prefix}.stats.csv"] = stats_csv(stats).encode()
    if config.emit_overlay:
        outputs[f"{prefix}.overlay.pgm"] = write_overlay(raster, real)
    parent = os.path.dirname(os.path.abspath(prefix))
    os.makedirs(parent, exist_ok=True)
    for path, blob in outputs.items():
        _atomic_write(path, blob)
    return PipelineResult(real, stats, virtual, edges, sorted(outputs))


def build_parser() -> argparse.ArgumentParser:
    d = DetectionConfig()
    p = argparse.ArgumentParser(
        prog="rhtellipse",
        description="Randomized Hough Transform ellipse detection with result clustering.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("--input", required=True, help="P2/P5/P6 image (or an edge map with --edges-only)")
    p.add_argument("--out-prefix", required=True, help="path prefix for output files")
    p.add_argument("--seed", type=int, default=d.rng_seed, help="PCG64 seed for pair sampling")
    p.add_argument("--c-factor", type=int, default=d.c_factor, help="pairs drawn per edge point (reference setting 2)")
    p.add_argument("--quality", type=int, default=d.quality_threshold, help="minimum peak votes (reference setting 200)")
    p.add_argument("--dt", type=float, default=cluster.DEFAULT_THRESHOLD, help="clustering distance threshold (reference setting 20)")
    p.add_argument("--a-min", type=float, default=d.a_min, help="smallest half major axis, px")
    p.add_argument("--a-max", type=float, default=d.a_max, help="largest half major axis, px")
    p.add_argument("--b-min", type=float, default=d.b_min, help="smallest half minor axis, px")
    p.add_argument("--bin-width", type=float, default=d.accumulator_bin_width, help="accumulator bin width, px")
    p.add_argument("--side-balance", type=float, default=d.side_balance_min, help="minimum side ratio for contour support")
    p.add_argument("--tolerance", type=float, default=d.contour_tolerance, help="contour proximity tolerance, px")
    p.add_argument("--overlay", action="store_true", help="write <prefix>.overlay.pgm")
    p.add_argument("--stats", action="store_true", help="write <prefix>.stats.csv")
    p.add_argument("--edges-only", action="store_true", help="input is already an edge map; skip preprocessing")
    return p


def config_from_args(args) -> PipelineConfig:
    detection = DetectionConfig(
        c_factor=args.c_factor,
        a_min=args.a_min,
        a_max=args.a_max,
        b_min=args.b_min,
        quality_threshold=args.quality,
        side_balance_min=args.side_balance,
        contour_tolerance=args.tolerance,
        accumulator_bin_width=args.bin_width,
        rng_seed=args.seed,
    )
    return PipelineConfig(
        input=args.input,
        out_prefix=args.out_prefix,
        detection=detection,
        d_threshold=args.dt,
        emit_overlay=args.overlay,
        emit_stats=args.stats,
        skip_preprocess=args.edges_only,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except ConfigError as exc:
        print(json.dumps({"error": "ConfigError", "stage": "config", "message": str(exc)}), file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run_pipeline(config)
    except PipelineError as exc:
        print(exc.as_json(), file=sys.stderr)
        return exc.code
    for path in result.outputs:
        print(path)
    return EXIT_OK


# one flag per config field, kept in sync by a test
FLAG_FIELDS = {
    "--seed": "rng_seed",
    "--c-factor": "c_factor",
    "--quality": "quality_threshold",
    "--a-min": "a_min",
    "--a-max": "a_max",
    "--b-min": "b_min",
    "--bin-width": "accumulator_bin_width",
    "--side-balance": "side_balance_min",
    "--tolerance": "contour_tolerance",
    "--dt": "d_threshold",
    "--overlay": "emit_overlay",
    "--stats": "emit_stats",
    "--edges-only": "skip_preprocess",
    "--input": "input",
    "--out-prefix": "out_prefix",
}
assert set(FLAG_FIELDS.values()) == (
    {f.name for f in fields(DetectionConfig)} | {f.name for f in fields(PipelineConfig)}
) - {"detection"}
