"""Affine iterated function systems and their attractors.

Maps are stored exactly (rational matrix and offset) and also as float
arrays for the vectorised Hutchinson iteration.  Exact evaluation is used by
the code map and everything downstream of it; point clouds are float.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.spatial import ConvexHull, cKDTree
from scipy.spatial.distance import pdist

from .errors import BudgetExceeded, DimensionMismatch, NotHyperbolic, NotInjective
from .exact import inverse_exact, solve_exact, to_fraction

log = logging.getLogger(__name__)

DEFAULT_POINT_CAP = 10**7


def point_cap(default: int = DEFAULT_POINT_CAP) -> int:
    """Budget cap, overridable through the ``IFS_OALG_POINT_CAP`` variable."""
    env = os.environ.get("IFS_OALG_POINT_CAP")
    return int(env) if env else default


@dataclass(frozen=True)
class AffineContraction:
    """x -> matrix @ x + offset with rational entries; the matrix must be invertible."""

    matrix: tuple[tuple[Fraction, ...], ...]
    offset: tuple[Fraction, ...]

    def __post_init__(self):
        m = tuple(tuple(to_fraction(v) for v in row) for row in self.matrix)
        b = tuple(to_fraction(v) for v in self.offset)
        n = len(b)
        if n == 0 or len(m) != n or any(len(row) != n for row in m):
            raise DimensionMismatch(f"matrix must be {n}x{n} to match the offset")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "offset", b)
        if abs(np.linalg.det(self.A)) < 1e-300 or _exact_det_zero(m):
            raise NotInjective("affine map has a singular matrix")

    @property
    def dimension(self) -> int:
        return len(self.offset)

    @cached_property
    def A(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.matrix])

    @cached_property
    def b(self) -> np.ndarray:
        return np.array([float(v) for v in self.offset])

    @cached_property
    def ratio(self) -> float:
        return contraction_ratio(self)

    @cached_property
    def inverse(self) -> "AffineContraction":
        """The inverse affine map (generally expanding)."""
        inv = inverse_exact(self.matrix)
        off = tuple(-sum(inv[i][j] * self.offset[j] for j in range(self.dimension))
                    for i in range(self.dimension))
        return AffineContraction(inv, off)

    def __call__(self, x):
        """Evaluate at one point given as a sequence; exact for rational input."""
        return tuple(sum(a * xi for a, xi in zip(row, x)) + bi
                     for row, bi in zip(self.matrix, self.offset))

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Evaluate on an (N, n) float array."""
        return points @ self.A.T + self.b

    def fixed_point(self) -> tuple[Fraction, ...]:
        """Exact solution of (I - A) x = b."""
        n = self.dimension
        lhs = [[(1 if i == j else 0) - self.matrix[i][j] for j in range(n)] for i in range(n)]
        return solve_exact(lhs, self.offset)


def _exact_det_zero(m) -> bool:
    import sympy
    return sympy.Matrix(m).det() == 0


def contraction_ratio(gamma: AffineContraction) -> float:
    """Largest singular value of the linear part: the tight Lipschitz constant."""
    return float(np.linalg.norm(gamma.A, 2))


@dataclass(frozen=True)
class IFSystem:
    maps: tuple[AffineContraction, ...]
    name: str = field(default="", compare=False)
    # optional piecewise-affine left inverse (see ifs_oalg.exel)
    left_inverse: object = field(default=None, compare=False)

    def __post_init__(self):
        maps = tuple(self.maps)
        if not maps:
            raise ValueError("an IFS needs at least one map")
        dims = {g.dimension for g in maps}
        if len(dims) != 1:
            raise DimensionMismatch(f"maps of different dimensions {sorted(dims)}")
        object.__setattr__(self, "maps", maps)

    @property
    def d(self) -> int:
        return len(self.maps)

    @property
    def dimension(self) -> int:
        return self.maps[0].dimension

    @cached_property
    def ratio(self) -> float:
        return max(g.ratio for g in self.maps)

    @cached_property
    def base_point(self) -> tuple[Fraction, ...]:
        """Canonical point of K: the exact fixed point of the first map."""
        return self.maps[0].fixed_point()

    def __getitem__(self, i: int) -> AffineContraction:
        """1-indexed access, matching the letters of the coding alphabet."""
        if not 1 <= i <= self.d:
            raise IndexError(f"map index {i} outside 1..{self.d}")
        return self.maps[i - 1]

    def __repr__(self):
        return f"IFSystem({self.name or '?'}, d={self.d}, n={self.dimension})"


def is_hyperbolic(sys: IFSystem) -> tuple[bool, float]:
    return sys.ratio < 1, sys.ratio


def require_hyperbolic(sys: IFSystem) -> float:
    flag, c = is_hyperbolic(sys)
    if not flag:
        raise NotHyperbolic(f"contraction ratio {c} >= 1")
    return c


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Finite approximation of a compact set, within ``resolution`` in Hausdorff distance.

    Attractor approximations are never empty; an explicitly shaped (0, n)
    array is accepted for derived sets such as an empty branch set.
    """

    points: np.ndarray
    resolution: float = 0.0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.size == 0 and not (pts.ndim == 2 and pts.shape[1] > 0):
            raise ValueError("point cloud must be nonempty")
        pts = np.atleast_2d(pts)
        if pts.ndim != 2:
            raise DimensionMismatch("points must be an (N, n) array")
        object.__setattr__(self, "points", pts)

    @classmethod
    def empty(cls, dimension: int, resolution: float = 0.0) -> "PointCloud":
        return cls(np.zeros((0, dimension)), resolution)

    @classmethod
    def from_points(cls, points: Sequence, resolution: float = 0.0) -> "PointCloud":
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        return cls(pts, resolution)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return len(self.points)

    def distance_to(self, x) -> float:
        """Euclidean distance from a point to the cloud (inf when empty)."""
        if not len(self):
            return math.inf
        return float(self.tree.query(np.asarray(x, dtype=float))[0])

    @cached_property
    def tree(self) -> cKDTree:
        return cKDTree(self.points)

    def diameter(self) -> float:
        return cloud_diameter(self.points)


def cloud_diameter(points: np.ndarray) -> float:
    if len(points) < 2:
        return 0.0
    if points.shape[1] == 1:
        return float(points.max() - points.min())
    pts = points
    if len(points) > 64:
        try:
            pts = points[ConvexHull(points).vertices]
        except Exception:  # degenerate hull: fall back to the box diagonal
            return float(np.linalg.norm(points.max(axis=0) - points.min(axis=0)))
    return float(pdist(pts).max())


def hausdorff_distance(a: PointCloud, b: PointCloud) -> float:
    """Euclidean Hausdorff distance between two finite clouds."""
    if a.dimension != b.dimension:
        raise DimensionMismatch("clouds of different dimension")
    d_ab = b.tree.query(a.points)[0].max()
    d_ba = a.tree.query(b.points)[0].max()
    return float(max(d_ab, d_ba))


def deduplicate(points: np.ndarray, tol: float) -> np.ndarray:
    """Keep the first point of every grid cell; each dropped point lies within ``tol`` of a kept one."""
    if tol <= 0:
        _, idx = np.unique(points, axis=0, return_index=True)
        return points[np.sort(idx)]
    cell = tol / math.sqrt(points.shape[1])
    keys = np.floor(points / cell).astype(np.int64)
    _, idx = np.unique(keys, axis=0, return_index=True)
    return points[np.sort(idx)]


def hutchinson_step(sys: IFSystem, cloud: PointCloud, dedup_tol: float = 1e-12) -> PointCloud:
    """One application of C -> union of gamma_i(C), maps-major order."""
    if cloud.dimension != sys.dimension:
        raise DimensionMismatch("cloud and system dimensions differ")
    images = np.concatenate([g.apply(cloud.points) for g in sys.maps])
    pts = deduplicate(images, dedup_tol)
    return PointCloud(pts, sys.ratio * cloud.resolution + dedup_tol)


def self_similarity_residual(sys: IFSystem, cloud: PointCloud) -> float:
    return hausdorff_distance(hutchinson_step(sys, cloud, 0.0), cloud)


def seed_point(sys: IFSystem, eps: float) -> np.ndarray:
    """Fixed point of the first map, by iteration from the origin."""
    g = sys.maps[0]
    x = np.zeros(sys.dimension)
    for _ in range(100_000):
        nxt = g.A @ x + g.b
        if np.linalg.norm(nxt - x) < eps / 10:
            return nxt
        x = nxt
    raise NotHyperbolic("first map did not converge to a fixed point")


@dataclass(frozen=True)
class AttractorResult:
    cloud: PointCloud
    iterations: int
    last_step: float  # Hausdorff distance between the last two iterates


def attractor(sys: IFSystem, eps: float, cap: int | None = None) -> PointCloud:
    return attractor_run(sys, eps, cap).cloud


def attractor_run(sys: IFSystem, eps: float, cap: int | None = None) -> AttractorResult:
    """Deterministic Hutchinson iteration to resolution ``eps``.

    Two certificates bound h(C_k, K) for the k-th iterate:

    * a posteriori: h(C_{k-1}, K) <= (step + dedup) / (1 - c), so
      h(C_k, K) <= c (step + dedup) / (1 - c) + dedup;
    * a priori: h(C_0, K) <= reach = max_i |gamma_i(x*) - x*| / (1 - c), so
      h(C_k, K) <= c^k reach + dedup (1 + c + ... + c^(k-1)).

    Iteration stops when either falls to eps; the smaller one is returned
    as the resolution.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    c = require_hyperbolic(sys)
    cap = point_cap() if cap is None else cap
    dedup = eps * (1 - c) / 4
    seed = seed_point(sys, eps)
    # the seed is within c eps / (10 (1 - c)) of the true fixed point
    reach = max(float(np.linalg.norm(g.apply(seed[None, :])[0] - seed)) for g in sys.maps) / (1 - c)
    reach += c * eps / (10 * (1 - c))
    if reach <= eps:
        return AttractorResult(PointCloud(seed[None, :], reach), 0, 0.0)
    cloud = PointCloud(seed[None, :], 0.0)
    k = 0
    while True:
        if len(cloud) * sys.d > cap:
            raise BudgetExceeded(f"next iterate would hold {len(cloud) * sys.d} points (cap {cap})")
        nxt = hutchinson_step(sys, cloud, dedup)
        k += 1
        step = hausdorff_distance(cloud, nxt)
        res = min(c * (step + dedup) / (1 - c) + dedup,
                  c**k * reach + dedup * (1 - c**k) / (1 - c))
        if step + dedup <= eps * (1 - c) or res <= eps:
            log.debug("attractor converged after %d steps, %d points", k, len(nxt))
            return AttractorResult(PointCloud(nxt.points, res), k, step)
        cloud = nxt


def diameter_bound(cloud: PointCloud) -> float:
    """Certified over-estimate of diam(K) from an approximating cloud."""
    return cloud.diameter() + 2 * cloud.resolution
