"""Branch sets, separation conditions, separating neighbourhoods and partitions of unity.

Every set here is computed on a sample of the attractor.  A point y of
the cloud can sit up to ``cloud.resolution`` away from the true coincidence
point, so detection thresholds are widened by ``|A_i - A_j| * resolution``
and detected coincidences are then projected onto the exact solution set
of gamma_i(y) = gamma_j(y) when that affine system is consistent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import NoRadiusFound, OnBranchSet
from .ifs import IFSystem, PointCloud, diameter_bound

MAX_HALVINGS = 40
FINITE_BRANCH_TOLS = (2.0**-10, 2.0**-12, 2.0**-14)


@dataclass(frozen=True)
class BranchSet:
    """Clustered coincidences y with gamma_i(y) = gamma_j(y), and their common images."""

    values: np.ndarray          # cluster centres (k, n), approximating C
    points: np.ndarray          # gamma_i of the centres, clustered, approximating B
    spreads: np.ndarray         # diameter of each value cluster before merging
    merge_radius: float


class _Sample:
    """Images of a cloud under every map, with KD-trees."""

    def __init__(self, sys: IFSystem, cloud: PointCloud):
        self.sys = sys
        self.cloud = cloud
        self.images = [g.apply(cloud.points) for g in sys.maps]
        self.trees = [cKDTree(im) for im in self.images]

    def slack(self, tol: float) -> float:
        """Tolerance for membership in gamma_i(K) when only gamma_i(cloud) is known."""
        return tol + self.sys.ratio * self.cloud.resolution


@lru_cache(maxsize=16)
def _sample(sys: IFSystem, cloud: PointCloud) -> _Sample:
    return _Sample(sys, cloud)


def _pair_lipschitz(sys: IFSystem, i: int, j: int) -> float:
    return float(np.linalg.norm(sys.maps[i].A - sys.maps[j].A, 2))


def _clusters(points: np.ndarray, radius: float) -> list[np.ndarray]:
    """Single-linkage clusters at the given radius, ordered by first member."""
    if len(points) == 0:
        return []
    pairs = cKDTree(points).query_pairs(radius, output_type="ndarray")
    n = len(points)
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n)) if len(pairs) \
        else coo_matrix((n, n))
    _, labels = connected_components(graph, directed=False)
    order = []
    seen = set()
    for lab in labels:
        if lab not in seen:
            seen.add(lab)
            order.append(lab)
    return [np.flatnonzero(labels == lab) for lab in order]


def _polish(sys: IFSystem, i: int, j: int, ys: np.ndarray) -> np.ndarray:
    """Project onto {y : (A_i - A_j) y = b_j - b_i} when that system is solvable."""
    M = sys.maps[i].A - sys.maps[j].A
    r = sys.maps[j].b - sys.maps[i].b
    pinv = np.linalg.pinv(M)
    proj = ys - (ys @ M.T - r) @ pinv.T
    ok = np.linalg.norm(proj @ M.T - r, axis=1) <= 1e-12 * max(1.0, float(np.abs(r).max(initial=0)))
    out = ys.copy()
    out[ok] = proj[ok]
    return out


@lru_cache(maxsize=32)
def _branch_set(sys: IFSystem, cloud: PointCloud, tol: float) -> BranchSet:
    ys = cloud.points
    found, owners = [], []
    merge = 2 * tol
    for i, j in combinations(range(sys.d), 2):
        lip = _pair_lipschitz(sys, i, j)
        thresh = tol + lip * cloud.resolution
        merge = max(merge, 2 * thresh)
        gaps = np.linalg.norm(sys.maps[i].apply(ys) - sys.maps[j].apply(ys), axis=1)
        hit = gaps <= thresh
        if hit.any():
            found.append(_polish(sys, i, j, ys[hit]))
            owners.extend([i] * int(hit.sum()))
    n = sys.dimension
    if not found:
        empty = np.zeros((0, n))
        return BranchSet(empty, empty, np.zeros(0), merge)
    cand = np.concatenate(found)
    owners = np.array(owners)
    values, spreads, images = [], [], []
    for idx in _clusters(cand, merge):
        values.append(cand[idx].mean(axis=0))
        spreads.append(float(np.ptp(cand[idx], axis=0).max()) if len(idx) > 1 else 0.0)
        images.extend(sys.maps[owners[k]].apply(cand[k][None, :])[0] for k in idx)
    images = np.array(images)
    points = np.array([images[idx].mean(axis=0) for idx in _clusters(images, merge)])
    return BranchSet(np.array(values), points, np.array(spreads), merge)


def branched_values(sys: IFSystem, cloud: PointCloud, tol: float) -> PointCloud:
    """Approximation of C: points y of K where two maps coincide."""
    return PointCloud(_branch_set(sys, cloud, tol).values.reshape(-1, sys.dimension), cloud.resolution)


def branched_points(sys: IFSystem, cloud: PointCloud, tol: float) -> PointCloud:
    """Approximation of B: the common images gamma_i(y) = gamma_j(y)."""
    return PointCloud(_branch_set(sys, cloud, tol).points.reshape(-1, sys.dimension),
                      sys.ratio * cloud.resolution)


def index_set(sys: IFSystem, x, cloud: PointCloud, tol: float) -> set[int]:
    """{i : x lies within tol of gamma_i(cloud)}, 1-indexed."""
    smp = _sample(sys, cloud)
    x = np.asarray(x, dtype=float)
    return {i + 1 for i, t in enumerate(smp.trees) if t.query(x)[0] <= tol}


def check_strong_separation(sys: IFSystem, cloud: PointCloud, tol: float) -> tuple[bool, float]:
    smp = _sample(sys, cloud)
    gap = np.inf
    for i, j in combinations(range(sys.d), 2):
        gap = min(gap, float(smp.trees[j].query(smp.images[i])[0].min()))
    return bool(gap > tol + 2 * sys.ratio * cloud.resolution), float(gap)


def check_cograph_separation(sys: IFSystem, cloud: PointCloud, tol: float) -> tuple[bool, float]:
    """Min over pairs and cloud points of |gamma_i(y) - gamma_j(y)|.

    A pair only counts as separated when its gap beats the same widened
    threshold used to detect coincidences, so a True here always comes with
    an empty branched_values at the same tol.
    """
    smp = _sample(sys, cloud)
    gap, ok = np.inf, True
    for i, j in combinations(range(sys.d), 2):
        g = float(np.linalg.norm(smp.images[i] - smp.images[j], axis=1).min())
        ok &= g > tol + _pair_lipschitz(sys, i, j) * cloud.resolution
        gap = min(gap, g)
    return bool(ok), float(gap)


def _lemma_violations(sys: IFSystem, x, r: float, cloud: PointCloud, tol: float) -> list[str]:
    """Which of the three neighbourhood conditions fail for the closed ball B(x, r)."""
    smp = _sample(sys, cloud)
    x = np.asarray(x, dtype=float)
    bad = []
    bp = branched_points(sys, cloud, tol)
    if len(bp) and bp.distance_to(x) <= r:
        bad.append("i")
    idx = index_set(sys, x, cloud, smp.slack(tol))
    for i in range(sys.d):
        if i + 1 in idx:
            ys = smp.trees[i].query_ball_point(x, r)
            if not ys:
                continue
            for j in range(sys.d):
                if j != i and np.any(np.linalg.norm(smp.images[j][ys] - x, axis=1) <= r):
                    bad.append("ii")
                    break
        elif smp.trees[i].query(x)[0] <= r:
            bad.append("iii")
    return sorted(set(bad))


def separating_radius(sys: IFSystem, x, cloud: PointCloud, tol: float) -> float:
    """Largest r in {diam/2, diam/4, ...} whose closed ball satisfies the neighbourhood conditions.

    (i) the ball misses B; (ii) for i in I(x) and j != i, gamma_j(gamma_i^{-1}(ball))
    misses the ball; (iii) for i not in I(x), the ball misses gamma_i(K).
    """
    bp = branched_points(sys, cloud, tol)
    if len(bp) and bp.distance_to(x) <= tol:
        raise OnBranchSet(f"point {np.asarray(x, dtype=float).tolist()} lies on the branch set")
    r = diameter_bound(cloud)
    if r <= 0:
        r = 1.0
    for _ in range(MAX_HALVINGS):
        r /= 2
        if not _lemma_violations(sys, x, r, cloud, tol):
            return r
    raise NoRadiusFound(f"no separating radius after {MAX_HALVINGS} halvings")


@dataclass
class PartitionOfUnity:
    """Hat functions hat_k(x) = max(0, 1 - |x - x_k| / r_k), normalised together with a residual bump.

    The residual bump max(0, 1 - 4 max_k hat_k) vanishes wherever some hat
    is at least 1/4, so the hats alone sum to one on the covered set.
    """

    centers: np.ndarray
    radii: np.ndarray
    certified_radii: np.ndarray = field(default=None)

    def __post_init__(self):
        self.centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        self.radii = np.asarray(self.radii, dtype=float).reshape(-1)
        if len(self.centers) != len(self.radii):
            raise ValueError("one radius per centre")

    def __len__(self):
        return len(self.radii)

    def hats(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        dist = np.linalg.norm(pts[:, None, :] - self.centers[None, :, :], axis=2)
        return np.maximum(0.0, 1.0 - dist / self.radii[None, :])

    def _residual_hat(self, hats: np.ndarray) -> np.ndarray:
        top = hats.max(axis=1) if hats.shape[1] else np.zeros(len(hats))
        return np.maximum(0.0, 1.0 - 4.0 * top)

    def evaluate(self, points) -> np.ndarray:
        """(N, m) array of phi_k; the residual function is :meth:`residual`."""
        h = self.hats(points)
        return h / (h.sum(axis=1) + self._residual_hat(h))[:, None]

    def residual(self, points) -> np.ndarray:
        h = self.hats(points)
        res = self._residual_hat(h)
        return res / (h.sum(axis=1) + res)

    def __call__(self, x) -> np.ndarray:
        return self.evaluate(np.asarray(x, dtype=float)[None, :])[0]

    def certify(self, sys: IFSystem, cloud: PointCloud, tol: float) -> list[dict]:
        """Balls failing the neighbourhood conditions on the sample (empty when certified)."""
        out = []
        for k, (c, r) in enumerate(zip(self.centers, self.radii)):
            bad = _lemma_violations(sys, c, r, cloud, tol)
            if bad:
                out.append({"ball": k, "center": c.tolist(), "radius": float(r), "violated": bad})
        return out


def build_partition(sys: IFSystem, support: PointCloud, cloud: PointCloud, tol: float) -> PartitionOfUnity:
    """Greedy farthest-point cover of ``support`` by balls half the separating radius.

    Every support point ends up within r_k / 2 of a centre, so its largest
    hat is at least 1/2 and the residual bump vanishes there.
    """
    if len(support) == 0:
        raise ValueError("empty support")
    bp = branched_points(sys, cloud, tol)
    if len(bp):
        gap = cKDTree(bp.points).query(support.points)[0]
        if gap.min() <= tol:
            k = int(gap.argmin())
            raise OnBranchSet(f"support point {support.points[k].tolist()} lies on the branch set")
    pts = support.points[np.lexsort(support.points.T[::-1])]
    nearest = np.full(len(pts), np.inf)     # distance to the nearest centre
    covered = np.zeros(len(pts), dtype=bool)
    centers, radii, certified = [], [], []
    k = 0
    while True:
        x = pts[k]
        r = separating_radius(sys, x, cloud, tol)
        centers.append(x)
        certified.append(r)
        radii.append(r / 2)
        dist = np.linalg.norm(pts - x, axis=1)
        covered |= dist <= r / 4
        nearest = np.minimum(nearest, dist)
        if covered.all():
            break
        k = int(np.argmax(np.where(covered, -1.0, nearest)))
    return PartitionOfUnity(np.array(centers), np.array(radii), np.array(certified))


@dataclass
class BranchReport:
    branched_values: PointCloud
    branched_points: PointCloud
    finite_branch: bool
    branch_count: int | None
    strong_separation: bool
    strong_gap: float
    cograph_separation: bool
    cograph_gap: float
    tol: float
    resolution: float
    counts_by_tol: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "branched_values": self.branched_values.points.tolist(),
            "branched_points": self.branched_points.points.tolist(),
            "finite_branch": self.finite_branch,
            "finite_branch_status": (f"finite with {self.branch_count} points"
                                     if self.finite_branch else "inconclusive"),
            "branch_count": self.branch_count,
            "counts_by_tol": {repr(k): v for k, v in self.counts_by_tol.items()},
            "strong_separation": self.strong_separation,
            "strong_gap": self.strong_gap,
            "cograph_separation": self.cograph_separation,
            "cograph_gap": self.cograph_gap,
            "tol": self.tol,
            "resolution": self.resolution,
        }


def finite_branch_check(sys: IFSystem, cloud: PointCloud) -> tuple[bool, int | None, dict]:
    """Cluster count of C must agree across three tolerances, with point-like clusters."""
    counts = {}
    point_like = True
    for t in FINITE_BRANCH_TOLS:
        bs = _branch_set(sys, cloud, t)
        counts[t] = len(bs.values)
        if len(bs.spreads) and bs.spreads.max() > 2 * bs.merge_radius:
            point_like = False
    stable = len(set(counts.values())) == 1
    if stable and point_like:
        return True, counts[FINITE_BRANCH_TOLS[0]], counts
    return False, None, counts


def branch_report(sys: IFSystem, cloud: PointCloud, tol: float) -> BranchReport:
    finite, count, counts = finite_branch_check(sys, cloud)
    strong, sgap = check_strong_separation(sys, cloud, tol)
    cograph, cgap = check_cograph_separation(sys, cloud, tol)
    return BranchReport(
        branched_values=branched_values(sys, cloud, tol),
        branched_points=branched_points(sys, cloud, tol),
        finite_branch=finite,
        branch_count=count,
        strong_separation=strong,
        strong_gap=sgap,
        cograph_separation=cograph,
        cograph_gap=cgap,
        tol=tol,
        resolution=cloud.resolution,
        counts_by_tol=counts,
    )
