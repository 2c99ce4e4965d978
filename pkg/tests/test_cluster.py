import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rhtellipse.cluster import Cluster, cluster_ellipses, distance, representatives
from rhtellipse.geometry import Ellipse


def jittered(base: Ellipse, n, jitter, rng):
    out = []
    for _ in range(n):
        dx, dy, da, db = rng.uniform(-jitter, jitter, 4)
        a = base.a + da
        b = min(base.b + db, a)
        out.append(Ellipse(base.x0 + dx, base.y0 + dy, a, b, base.alpha + rng.uniform(-0.05, 0.05)))
    return out


def partition(clusters):
    return sorted(sorted(tuple(m.features.tolist()) for m in c.members) for c in clusters)


# --- distance -------------------------------------------------------------------


def test_distance_identical():
    v = (235.5, 164.5, 60, 37, 0.253)
    assert distance(v, v) == 0


def test_distance_three_four_five():
    assert distance((0, 0, 0, 0, 0), (3, 4, 0, 0, 0)) == 5


def test_distance_hand_evaluated():
    # 0.25 + 0.25 + 1 + 1 + 0.047^2
    got = distance((235.5, 164.5, 60, 37, 0.253), (236, 165, 59, 38, 0.3))
    assert got == pytest.approx(math.sqrt(2.502209), rel=1e-12)
    assert got == pytest.approx(1.5819, abs=1e-4)


def test_distance_accepts_ellipses():
    e = Ellipse(10, 20, 30, 15, 0.5)
    f = Ellipse(13, 24, 30, 15, 0.5)
    assert distance(e, f) == pytest.approx(5)


def test_distance_tiny_difference_does_not_underflow():
    assert distance((0, 0, 0, 0, 0), (0, 0, 0, 0, 7.3e-188)) == pytest.approx(7.3e-188)


def test_distance_wrong_length():
    with pytest.raises(ValueError):
        distance((1, 2, 3), (1, 2, 3))


def test_alpha_is_raw_unless_wrapped():
    e = Ellipse(50, 50, 30, 15, 0.01)
    f = Ellipse(50, 50, 30, 15, math.pi - 0.01)
    assert distance(e, f) == pytest.approx(math.pi - 0.02)
    assert distance(e, f, wrap_alpha=True) == pytest.approx(0.02)


vectors = st.lists(st.floats(-1e3, 1e3), min_size=5, max_size=5)


@settings(max_examples=200)
@given(v=vectors, w=vectors, u=vectors)
def test_distance_is_a_metric(v, w, u):
    assert distance(v, w) == distance(w, v)
    assert distance(v, v) == 0
    assert distance(v, w) >= 0
    assert distance(v, u) <= (distance(v, w) + distance(w, u)) * (1 + 1e-12)
    if v != w:
        assert distance(v, w) > 0


# --- clustering -------------------------------------------------------------------


def test_empty_input():
    assert cluster_ellipses([]) == []
    assert representatives([]) == []


def test_threshold_must_be_positive():
    with pytest.raises(ValueError):
        cluster_ellipses([], d_threshold=0)


def test_jittered_copies_form_one_cluster():
    base = Ellipse(160, 120, 50, 30, 0.7)
    ells = jittered(base, 30, 2.0, np.random.default_rng(0))
    # every pair is within the jitter norm bound, so no centroid can drift out of reach
    bound = math.sqrt(5 * 4**2)
    assert bound < 20
    assert all(distance(e, f) <= bound for e in ells for f in ells)
    clusters = cluster_ellipses(ells)
    assert len(clusters) == 1
    assert len(clusters[0].members) == 30


@pytest.mark.parametrize("seed", range(3))
def test_two_families_match_nearest_family_oracle(seed):
    rng = np.random.default_rng(seed)
    c1 = Ellipse(80, 120, 50, 30, 0.7)
    c2 = Ellipse(140, 200, 50, 30, 0.7)  # (60, 80) apart: distance 100
    assert distance(c1, c2) == pytest.approx(100)
    fam = [jittered(c1, 20, 2.0, rng), jittered(c2, 20, 2.0, rng)]
    ells = [e for pair in zip(*fam) for e in pair]  # interleaved
    clusters = cluster_ellipses(ells)
    assert len(clusters) == 2
    # brute force: each ellipse belongs with the family whose members it is closest to
    for c in clusters:
        for m in c.members:
            near = [min(distance(m, f) for f in family) for family in fam]
            home = 0 if m in fam[0] else 1
            assert near[home] == 0 and near[1 - home] > 80
            assert all((x in fam[home]) for x in c.members)


def test_nearest_qualifying_cluster_wins():
    a = Ellipse(100, 100, 40, 20, 0)
    b = Ellipse(130, 100, 40, 20, 0)
    probe = Ellipse(118, 100, 40, 20, 0)  # 18 from a, 12 from b
    clusters = cluster_ellipses([a, b, probe])
    assert [len(c.members) for c in clusters] == [1, 2]
    assert clusters[1].certificates == [0.0, pytest.approx(12)]


@pytest.mark.parametrize("seed", range(5))
def test_partition_centroid_and_certificates(seed):
    rng = np.random.default_rng(seed)
    ells = []
    for _ in range(60):
        a = rng.uniform(15, 60)
        ells.append(Ellipse(*rng.uniform(0, 120, 2), a, rng.uniform(5, a), rng.uniform(0, math.pi)))
    clusters = cluster_ellipses(ells, d_threshold=20)
    members = [m for c in clusters for m in c.members]
    assert len(members) == len(ells)
    assert sorted(map(id, members)) == sorted(map(id, ells))
    for c in clusters:
        assert c.members
        np.testing.assert_allclose(c.centroid, np.mean([m.features for m in c.members], axis=0), rtol=1e-12)
        assert len(c.certificates) == len(c.members)
        assert all(d <= 20 for d in c.certificates)
    # replay: each certificate is the distance to the centroid as it stood before the join
    for c in clusters:
        for k in range(1, len(c.members)):
            before = np.mean([m.features for m in c.members[:k]], axis=0)
            assert c.certificates[k] == pytest.approx(distance(c.members[k], before), rel=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_permutation_invariance_when_well_separated(seed):
    rng = np.random.default_rng(seed)
    centres = [Ellipse(60 + 90 * i, 60 + 70 * (i % 2), 45, 25, 0.3 * i) for i in range(4)]
    ells = [e for c in centres for e in jittered(c, 8, 1.5, rng)]
    for fam_a in range(4):
        for fam_b in range(4):
            d = [distance(e, f) for e in ells[8 * fam_a : 8 * fam_a + 8] for f in ells[8 * fam_b : 8 * fam_b + 8]]
            assert (max(d) < 10) if fam_a == fam_b else (min(d) > 40)
    reference = partition(cluster_ellipses(ells))
    for _ in range(10):
        order = rng.permutation(len(ells))
        assert partition(cluster_ellipses([ells[i] for i in order])) == reference


def test_order_is_deterministic():
    rng = np.random.default_rng(9)
    ells = jittered(Ellipse(100, 100, 40, 20, 1.0), 15, 12.0, rng)
    a = cluster_ellipses(ells)
    b = cluster_ellipses(list(ells))
    assert [c.members for c in a] == [c.members for c in b]


# --- representatives ---------------------------------------------------------------


def test_singleton_representative():
    e = Ellipse(10, 10, 5, 3, 0)
    assert representatives(cluster_ellipses([e])) == [e]


def test_representative_is_argmin():
    centroid = np.array([100.0, 100.0, 40.0, 20.0, 0.0])
    members = [
        Ellipse(103, 100, 40, 20, 0),
        Ellipse(100.5, 100, 40, 20, 0),
        Ellipse(100, 107.1, 40, 20, 0),
    ]
    c = Cluster(members=members, centroid=centroid, certificates=[0, 0, 0])
    assert [distance(m, centroid) for m in members] == pytest.approx([3.0, 0.5, 7.1])
    assert representatives([c]) == [members[1]]


def test_representative_tie_goes_to_earliest():
    centroid = np.array([100.0, 100.0, 40.0, 20.0, 0.0])
    members = [Ellipse(102, 100, 40, 20, 0), Ellipse(98, 100, 40, 20, 0)]
    c = Cluster(members=members, centroid=centroid, certificates=[0, 0])
    assert representatives([c])[0] is members[0]


@pytest.mark.parametrize("seed", range(3))
def test_representatives_are_members_in_creation_order(seed):
    rng = np.random.default_rng(seed)
    fam = [jittered(Ellipse(60 + 120 * i, 120, 40, 25, 0.4), 10, 2.0, rng) for i in range(2)]
    clusters = cluster_ellipses(fam[0] + fam[1])
    reps = representatives(clusters)
    assert len(reps) == 2
    for c, r in zip(clusters, reps):
        assert any(r is m for m in c.members)
        assert r.x0 < 120 if c is clusters[0] else r.x0 > 120
