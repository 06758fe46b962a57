import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ifs_oalg.branch import (PartitionOfUnity, branch_report, branched_points, branched_values, build_partition,
                             check_cograph_separation, check_strong_separation, finite_branch_check, index_set,
                             separating_radius)
from ifs_oalg.errors import OnBranchSet
from ifs_oalg.ifs import AffineContraction, IFSystem, PointCloud, attractor

F = Fraction


def values(pc: PointCloud) -> list[float]:
    return sorted(pc.points[:, 0].tolist())


def test_branched_values_examples(systems, clouds):
    tent = values(branched_values(systems["TENTINV"], clouds["TENTINV"], 1e-6))
    assert len(tent) == 1 and tent[0] == pytest.approx(1.0, abs=1e-6)
    assert len(branched_values(systems["CANTOR3"], clouds["CANTOR3"], 1e-6)) == 0
    assert len(branched_values(systems["HALVES"], clouds["HALVES"], 1e-6)) == 0


def test_branched_points_examples(systems, clouds):
    tent = values(branched_points(systems["TENTINV"], clouds["TENTINV"], 1e-6))
    assert len(tent) == 1 and tent[0] == pytest.approx(0.5, abs=1e-6)
    assert len(branched_points(systems["CANTOR3"], clouds["CANTOR3"], 1e-6)) == 0
    assert len(branched_points(systems["SIERP"], clouds["SIERP"], 1e-6)) == 0


def test_tent_branch_sets_match_closed_form(systems, clouds):
    # solve y/2 = 1 - y/2 exactly
    g1, g2 = systems["TENTINV"][1], systems["TENTINV"][2]
    a = g1.matrix[0][0] - g2.matrix[0][0]
    y = (g2.offset[0] - g1.offset[0]) / a
    assert (y, g1((y,))[0]) == (1, F(1, 2))
    sys, cloud = systems["TENTINV"], clouds["TENTINV"]
    assert cloud.resolution <= 1e-4
    assert np.abs(branched_values(sys, cloud, 1e-5).points - float(y)).max() <= 1e-6
    assert np.abs(branched_points(sys, cloud, 1e-5).points - float(g1((y,))[0])).max() <= 1e-6


def test_index_set_examples(systems, clouds):
    sys, cloud = systems["TENTINV"], clouds["TENTINV"]
    assert index_set(sys, [0.5], cloud, 1e-4) == {1, 2}
    assert index_set(sys, [0.1], cloud, 1e-4) == {1}
    assert index_set(sys, [0.9], cloud, 1e-4) == {2}
    assert index_set(systems["CANTOR3"], [0.5], clouds["CANTOR3"], 1e-4) == set()
    assert index_set(systems["CANTOR3"], [0.5], clouds["CANTOR3"], 0.17) == {1, 2}


def test_strong_separation_examples(systems, clouds):
    ok, gap = check_strong_separation(systems["CANTOR3"], clouds["CANTOR3"], 1e-6)
    assert ok and gap == pytest.approx(1 / 3, abs=0.01)
    for name in ("HALVES", "TENTINV"):
        ok, gap = check_strong_separation(systems[name], clouds[name], 1e-6)
        assert not ok and gap <= 1e-3


def test_cograph_separation_examples(systems, clouds):
    ok, gap = check_cograph_separation(systems["HALVES"], clouds["HALVES"], 1e-6)
    assert ok and gap == pytest.approx(0.5)
    ok, gap = check_cograph_separation(systems["SIERP"], clouds["SIERP"], 1e-6)
    assert ok and gap == pytest.approx(0.5)
    ok, gap = check_cograph_separation(systems["CANTOR3"], clouds["CANTOR3"], 1e-6)
    assert ok and gap == pytest.approx(2 / 3)
    ok, gap = check_cograph_separation(systems["TENTINV"], clouds["TENTINV"], 1e-6)
    assert not ok and gap <= 1e-3


def test_separating_radius_examples(systems, clouds):
    sys, cloud = systems["TENTINV"], clouds["TENTINV"]
    assert separating_radius(sys, [0.25], cloud, 1e-6) >= 0.1
    with pytest.raises(OnBranchSet):
        separating_radius(sys, [0.5], cloud, 1e-6)
    c3, k3 = systems["CANTOR3"], clouds["CANTOR3"]
    for x in k3.points[::97]:
        assert separating_radius(c3, x, k3, 1e-6) >= 1 / 6


def _ball_conditions_hold(sys, x, r, cloud):
    """Direct oracle for the three neighbourhood conditions, by brute force over the sample."""
    x = np.asarray(x, dtype=float)
    imgs = [g.apply(cloud.points) for g in sys.maps]
    res = sys.ratio * cloud.resolution + 1e-6
    inside = [np.linalg.norm(im - x, axis=1) <= r for im in imgs]
    near = [np.linalg.norm(im - x, axis=1).min() <= res for im in imgs]
    for i in range(sys.d):
        if near[i]:
            for j in range(sys.d):
                if j != i and np.any(np.linalg.norm(imgs[j][inside[i]] - x, axis=1) <= r):
                    return False
        elif inside[i].any():
            return False
    return True


def test_separating_radius_against_brute_force(systems, clouds):
    sys, cloud = systems["TENTINV"], clouds["TENTINV"]
    for x in (0.05, 0.2, 0.3, 0.7, 0.95):
        r = separating_radius(sys, [x], cloud, 1e-6)
        assert _ball_conditions_hold(sys, [x], r, cloud)
        assert abs(x - 0.5) > r
        # the radius is the largest dyadic one: doubling it fails somewhere
        if 2 * r < 0.5:
            assert not _ball_conditions_hold(sys, [x], 2 * r, cloud) or abs(x - 0.5) <= 2 * r


def _check_partition(part: PartitionOfUnity, pts: np.ndarray):
    phi = part.evaluate(pts)
    total = phi.sum(axis=1) + part.residual(pts)
    assert np.abs(total - 1).max() <= 1e-12
    dist = np.linalg.norm(pts[:, None, :] - part.centers[None, :, :], axis=2)
    assert np.all(phi[dist >= part.radii[None, :]] == 0)


def test_partition_tent_support(systems, clouds):
    sys, cloud = systems["TENTINV"], clouds["TENTINV"]
    support = PointCloud(cloud.points[cloud.points[:, 0] <= 0.3])
    part = build_partition(sys, support, cloud, 1e-6)
    assert np.all((part.centers >= 0) & (part.centers <= 0.3))
    assert np.all(np.abs(part.centers[:, 0] - 0.5) > part.radii)
    assert part.certify(sys, cloud, 1e-6) == []
    _check_partition(part, cloud.points)
    # on the support the hats alone sum to one
    assert np.abs(part.evaluate(support.points).sum(axis=1) - 1).max() <= 1e-12


def test_partition_cantor_full(systems, clouds):
    sys, cloud = systems["CANTOR3"], clouds["CANTOR3"]
    part = build_partition(sys, cloud, cloud, 1e-6)
    assert part.certify(sys, cloud, 1e-6) == []
    _check_partition(part, cloud.points)
    assert np.abs(part.evaluate(cloud.points).sum(axis=1) - 1).max() <= 1e-12


def test_partition_rejects_branch_points(systems, clouds):
    sys, cloud = systems["TENTINV"], clouds["TENTINV"]
    with pytest.raises(OnBranchSet):
        build_partition(sys, cloud, cloud, 1e-6)


@given(st.lists(st.floats(0, 1), min_size=1, max_size=30))
def test_partition_sums_to_one_anywhere(xs):
    part = PartitionOfUnity(np.array([[0.1], [0.4], [0.8]]), np.array([0.2, 0.1, 0.3]))
    _check_partition(part, np.array(xs)[:, None])


def test_oversized_partition_fails_certification(systems, clouds):
    part = PartitionOfUnity(np.array([[0.15]]), np.array([2.0]))
    assert part.certify(systems["TENTINV"], clouds["TENTINV"], 1e-6)


def test_tolerance_monotonicity(systems, clouds):
    sys, cloud = systems["TENTINV"], clouds["TENTINV"]
    tols = [1e-6, 1e-5, 1e-4, 1e-3]
    sets = [branched_values(sys, cloud, t) for t in tols]
    for small, big, t in zip(sets, sets[1:], tols[1:]):
        for p in small.points:
            assert big.distance_to(p) <= 2 * t + 2 * cloud.resolution


def test_finite_branch_condition(systems, clouds):
    ok, count, _ = finite_branch_check(systems["TENTINV"], clouds["TENTINV"])
    assert ok and count == 1
    ok, count, _ = finite_branch_check(systems["CANTOR3"], clouds["CANTOR3"])
    assert ok and count == 0


def test_identity_pair_is_not_finite_branch():
    # two equal maps coincide everywhere: C is all of K
    g = AffineContraction(((F(1, 2),),), (F(0),))
    h = AffineContraction(((F(1, 2),),), (F(1, 2),))
    sys = IFSystem((g, g, h))
    cloud = attractor(sys, 1e-3)
    ok, count, counts = finite_branch_check(sys, cloud)
    assert not ok and count is None
    assert branch_report(sys, cloud, 1e-6).to_json()["finite_branch_status"] == "inconclusive"


maps1d = st.tuples(st.fractions(-F(3, 5), F(3, 5), max_denominator=10).filter(lambda a: a != 0),
                   st.fractions(-1, 1, max_denominator=10))


@settings(max_examples=25)
@given(st.lists(maps1d, min_size=2, max_size=3))
def test_separation_consistency_on_random_systems(spec):
    sys = IFSystem(tuple(AffineContraction(((a,),), (b,)) for a, b in spec))
    cloud = attractor(sys, 1e-3)
    tol = 1e-6
    strong, _ = check_strong_separation(sys, cloud, tol)
    cograph, _ = check_cograph_separation(sys, cloud, tol)
    if strong:
        assert cograph
    if cograph:
        assert len(branched_values(sys, cloud, tol)) == 0


@pytest.mark.parametrize("name", ["CANTOR3", "HALVES", "TENTINV", "SIERP"])
def test_consistency_on_builtins(systems, clouds, name):
    rep = branch_report(systems[name], clouds[name], 1e-6)
    if rep.strong_separation:
        assert rep.cograph_separation
    if rep.cograph_separation:
        assert len(rep.branched_values) == 0


def test_report_json(systems, clouds):
    rep = branch_report(systems["TENTINV"], clouds["TENTINV"], 1e-6).to_json()
    again = json.loads(json.dumps(rep))
    assert again["finite_branch_status"] == "finite with 1 points"
    assert again["branched_points"] == [[pytest.approx(0.5, abs=1e-6)]]
    assert again["cograph_separation"] is False
    assert again["resolution"] <= 1e-4
