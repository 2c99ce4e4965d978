import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rhtellipse.detector import DetectionConfig
from rhtellipse.geometry import Ellipse, distance_to_ellipse
from rhtellipse.synth import (
    SceneSpec,
    Tolerance,
    angle_gap,
    contour_pixels,
    grade,
    random_scene,
    rasterize,
    twin_scene,
)


def sampled_band(e, width, height, half_width, step_deg=0.1):
    """Pixels within ``half_width`` of contour points sampled every ``step_deg``."""
    t = np.radians(np.arange(0, 360, step_deg))
    px, py = e.point_at(t)
    hit = np.zeros((height, width), dtype=bool)
    r = int(math.ceil(half_width)) + 1
    for x, y in zip(px, py):
        for yy in range(int(y) - r, int(y) + r + 2):
            for xx in range(int(x) - r, int(x) + r + 2):
                if 0 <= xx < width and 0 <= yy < height and math.hypot(xx - x, yy - y) <= half_width:
                    hit[yy, xx] = True
    return hit


# --- rasterize -------------------------------------------------------------------


def test_circle_pixel_count():
    e = Ellipse(30, 30, 10, 10, 0)
    mask = rasterize(SceneSpec(60, 60, (e,), 0, 1.0)).to_mask()
    assert 55 <= mask.sum() <= 75
    # contour step 0.017 px; the oracle can only miss pixels within that of the band edge
    oracle = sampled_band(e, 60, 60, 0.5)
    assert not (oracle & ~mask).any()
    assert (mask & ~oracle).sum() <= 2


def test_clutter_only():
    em = rasterize(SceneSpec(50, 40, (), 100, 1.0, rng_seed=4))
    assert len(em) == 100


def test_clutter_capped_by_free_space():
    assert len(rasterize(SceneSpec(5, 4, (), 100, 1.0))) == 20


def test_clutter_avoids_contour():
    e = Ellipse(40, 30, 20, 12, 0.3)
    bare = rasterize(SceneSpec(80, 60, (e,), 0, 2.0))
    noisy = rasterize(SceneSpec(80, 60, (e,), 300, 2.0, rng_seed=1))
    assert len(noisy) == len(bare) + 300
    assert not (bare.to_mask() & ~noisy.to_mask()).any()


@pytest.mark.parametrize("thickness", [1.0, 2.0, 5.0])
def test_contour_pixels_satisfy_band_predicate(thickness):
    e = Ellipse(60, 50, 40, 22, 0.9)
    mask = contour_pixels(e, 120, 100, thickness)
    ys, xs = np.nonzero(mask)
    assert len(xs) > 0
    assert distance_to_ellipse(e, xs, ys).max() <= thickness / 2
    # and the band is complete: nothing nearby is left out
    yy, xx = np.mgrid[0:100, 0:120]
    inside = distance_to_ellipse(e, xx, yy) <= thickness / 2
    assert np.array_equal(inside, mask)


def test_default_band_within_detector_tolerance():
    # thickness-2 contours sit inside the detector's default proximity band
    assert 2.0 / 2 <= DetectionConfig().contour_tolerance


def test_rasterize_deterministic():
    spec = random_scene(3)
    assert rasterize(spec) == rasterize(spec)


def test_clutter_depends_on_seed():
    a = rasterize(SceneSpec(100, 100, (), 50, 1.0, rng_seed=1))
    b = rasterize(SceneSpec(100, 100, (), 50, 1.0, rng_seed=2))
    assert a != b


# --- scene specs --------------------------------------------------------------------


def test_spec_rejects_out_of_frame():
    with pytest.raises(ValueError):
        SceneSpec(100, 100, (Ellipse(20, 50, 25, 10, 0),), 0, 1.0)


def test_spec_rejects_touching_ellipses():
    with pytest.raises(ValueError):
        SceneSpec(200, 100, (Ellipse(60, 50, 30, 10, 0), Ellipse(115, 50, 30, 10, 0)), 0, 1.0)


@pytest.mark.parametrize("kw", [{"width": 0}, {"clutter_points": -1}, {"contour_thickness": 0}])
def test_spec_rejects_bad_fields(kw):
    args = dict(width=10, height=10, ellipses=(), clutter_points=0, contour_thickness=1.0)
    args.update(kw)
    with pytest.raises(ValueError):
        SceneSpec(**args)


def test_json_round_trip():
    spec = random_scene(11)
    assert SceneSpec.from_json(spec.to_json()) == spec


@pytest.mark.parametrize("seed", range(6))
def test_random_scene_meets_its_contract(seed):
    spec = random_scene(seed)
    assert 1 <= len(spec.ellipses) <= 3
    assert (spec.width, spec.height, spec.contour_thickness, spec.clutter_points) == (320, 240, 2.0, 150)
    quality = DetectionConfig().quality_threshold
    for e in spec.ellipses:
        assert 15 <= e.a <= 70 and 8 <= e.b < e.a
        assert contour_pixels(e, 320, 240, 2.0).sum() >= quality


@pytest.mark.parametrize("seed", range(4))
def test_twin_scene_layout(seed):
    spec = twin_scene(seed)
    left, right = spec.ellipses
    assert left.x0 < 160 < right.x0
    for e in spec.ellipses:
        assert 45 <= e.a <= 60 and 0.5 * e.a <= e.b <= 0.8 * e.a


# --- grading ----------------------------------------------------------------------------


TRUTH = (Ellipse(80, 60, 40, 20, 0.3), Ellipse(220, 150, 50, 30, 2.0))


def test_grade_exact():
    r = grade(TRUTH, TRUTH)
    assert (r.matched, r.false_positives) == (2, 0)
    assert all(err == 0 for row in r.errors for err in row[2:])


def test_grade_empty_detected():
    r = grade([], TRUTH)
    assert (r.matched, r.false_positives) == (0, 0)


def test_grade_center_boundary():
    off = Ellipse(83, 60, 40, 20, 0.3)
    r = grade([off], TRUTH[:1], Tolerance(center=2))
    assert (r.matched, r.false_positives) == (0, 1)
    assert grade([Ellipse(82, 60, 40, 20, 0.3)], TRUTH[:1]).matched == 1


def test_grade_angle_mod_pi():
    near_pi = Ellipse(80, 60, 40, 20, math.pi - 0.02)
    assert grade([near_pi], [Ellipse(80, 60, 40, 20, 0.03)]).matched == 1
    assert angle_gap(0.03, math.pi - 0.02) == pytest.approx(0.05)


def test_grade_one_to_one():
    dup = [TRUTH[0], Ellipse(80.5, 60, 40, 20, 0.3)]
    r = grade(dup, TRUTH[:1])
    assert (r.matched, r.false_positives) == (1, 1)
    assert r.errors[0][1] == 0  # the exact copy wins


@settings(max_examples=30, deadline=None)
@given(st.permutations(range(4)))
def test_grade_permutation_symmetric(order):
    detected = [TRUTH[0], Ellipse(221, 151, 51, 29, 2.05), Ellipse(10, 10, 30, 10, 0), Ellipse(300, 20, 15, 10, 1)]
    base = grade(detected, TRUTH)
    r = grade([detected[i] for i in order], TRUTH)
    assert (r.matched, r.false_positives) == (base.matched, base.false_positives) == (2, 2)
    assert sorted(e[2:] for e in r.errors) == sorted(e[2:] for e in base.errors)
