"""The endomorphism alpha(a) = a o gamma, the transfer operator L and the Toeplitz relations.

gamma is a user-supplied piecewise-affine left inverse of every map.  The
scaled shift S_hat = d^(-1/2) S is kept as a RootScaled element, so the
Toeplitz relations are compared with exact coefficients.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .algebra import RootScaled, shift_element, unit_scalar
from .branch import PartitionOfUnity, build_partition
from .errors import NotLeftInverse
from .functions import SampledFunction, apply_affine, is_array_point
from .ifs import IFSystem, PointCloud
from .pimsner import iota
from .piecewise import PiecewiseAffineMap

TOEPLITZ_NOTE = "S_hat = d^(-1/2) sum_i s_i, so that S_hat^* S_hat = 1 and S_hat^* iota(a) S_hat = iota(L(a))"
REDUNDANCY_NOTE = (
    "checked as b = sum_k sqrt(phi_k) d (alpha o L)(sqrt(phi_k) b): with L carrying the factor 1/d, "
    "the unscaled sum equals b/d on the support"
)


def _margin(cloud: PointCloud, tol: float) -> float:
    return max(cloud.resolution, tol)


def verify_left_inverse(sys: IFSystem, gamma: PiecewiseAffineMap, cloud: PointCloud, tol: float) -> dict:
    """max over i and y in the cloud of |gamma(gamma_i(y)) - y|.

    Images landing within max(resolution, tol) of a jump of gamma are
    skipped and counted.  Raises NotLeftInverse (report attached) above tol.
    """
    margin = _margin(cloud, tol)
    worst = (0.0, None, None)
    skipped = 0
    for i, g in enumerate(sys.maps, 1):
        img = g.apply(cloud.points)
        near = gamma.near_discontinuity(img, margin)
        skipped += int(near.sum())
        back = gamma.apply(img[~near])
        err = np.linalg.norm(back - cloud.points[~near], axis=1)
        err = np.where(np.isnan(err), np.inf, err)
        if len(err) and err.max() > worst[0]:
            k = int(err.argmax())
            worst = (float(err[k]), i, cloud.points[~near][k].tolist())
    report = {
        "check": "left_inverse",
        "status": "pass" if worst[0] <= tol else "fail",
        "residual": worst[0],
        "worst": {"map": worst[1], "point": worst[2]},
        "skipped_near_jumps": skipped,
        "continuous": gamma.continuous,
        "tolerances": {"residual": tol, "jump_margin": margin},
    }
    if not gamma.continuous:
        report["warning"] = "left inverse is discontinuous"
    if worst[0] > tol:
        raise NotLeftInverse(f"gamma(gamma_{worst[1]}(y)) misses y = {worst[2]} by {worst[0]:.3g}", report)
    return report


def alpha(a: SampledFunction, gamma: PiecewiseAffineMap) -> SampledFunction:
    """x -> a(gamma(x))."""
    def ev(x):
        if is_array_point(x):
            return a.evaluator(tuple(gamma.apply(np.column_stack(x)).T))
        return a.evaluator(gamma(x))
    return SampledFunction(ev, a.lipschitz * gamma.lipschitz, a.sup)


def transfer(a: SampledFunction, sys: IFSystem) -> SampledFunction:
    """y -> (1/d) sum_i a(gamma_i(y))."""
    inv_d = Fraction(1, sys.d)

    def ev(x):
        total = 0
        for g in sys.maps:
            total = total + a.evaluator(apply_affine(g, x))
        return (1.0 / sys.d if is_array_point(x) else inv_d) * total
    return SampledFunction(ev, a.lipschitz * sys.ratio, a.sup)


def _away_from_jumps(sys: IFSystem, gamma: PiecewiseAffineMap, points: np.ndarray, margin: float) -> np.ndarray:
    keep = ~gamma.near_discontinuity(points, margin)
    for g in sys.maps:
        keep &= ~gamma.near_discontinuity(g.apply(points), margin)
    return keep


def verify_transfer_identity(a: SampledFunction, b: SampledFunction, sys: IFSystem,
                             gamma: PiecewiseAffineMap, cloud: PointCloud, tol: float) -> dict:
    """max over the cloud of |L(alpha(a) b) - a L(b)|."""
    pts = cloud.points[_away_from_jumps(sys, gamma, cloud.points, _margin(cloud, tol))]
    lhs = transfer(alpha(a, gamma) * b, sys).values(pts)
    rhs = a.values(pts) * transfer(b, sys).values(pts)
    res = float(np.abs(lhs - rhs).max()) if len(pts) else 0.0
    return {
        "check": "transfer_identity",
        "status": "pass" if res <= tol else "fail",
        "residual": res,
        "points": len(pts),
        "tolerances": {"residual": tol},
    }


def s_hat(d: int) -> RootScaled:
    return RootScaled(shift_element(d), -1)


def verify_toeplitz(a: SampledFunction, sys: IFSystem, gamma: PiecewiseAffineMap, depth: int) -> dict:
    """(i) S_hat iota(a, n) - iota(alpha(a), n+1) S_hat;  (ii) S_hat^* iota(a, n+1) S_hat - iota(L(a), n)."""
    S = s_hat(sys.d)
    r1 = S * iota(a, sys, depth) - iota(alpha(a, gamma), sys, depth + 1) * S
    r2 = S.star * iota(a, sys, depth + 1) * S - iota(transfer(a, sys), sys, depth)
    z1, z2 = r1.is_zero(), r2.is_zero()
    return {
        "check": "toeplitz",
        "depth": depth,
        "status": "exact" if z1 and z2 else "fail",
        "relation_i": "exact_zero" if z1 else f"{len(r1.element.terms)} nonzero terms",
        "relation_ii": "exact_zero" if z2 else f"{len(r2.element.terms)} nonzero terms",
        "tolerances": {"coefficients": "exact"},
        "normalization_note": TOEPLITZ_NOTE,
    }


def verify_exel_gauge(a: SampledFunction, sys: IFSystem, depth: int, z) -> dict:
    """gauge(S_hat iota(a, n), z) = z S_hat iota(a, n), exactly."""
    el = s_hat(sys.d) * iota(a, sys, depth)
    zero = (el.gauge(z) - unit_scalar(z) * el).is_zero()
    return {"check": "exel_gauge", "depth": depth, "status": "exact" if zero else "fail"}


def redundancy_values(b: SampledFunction, sys: IFSystem, gamma: PiecewiseAffineMap,
                      partition: PartitionOfUnity, points: np.ndarray) -> np.ndarray:
    """sum_k sqrt(phi_k(x)) sum_i sqrt(phi_k)(gamma_i gamma x) b(gamma_i gamma x)."""
    root = np.sqrt(partition.evaluate(points))
    back = gamma.apply(points)
    total = np.zeros(len(points), dtype=complex)
    for g in sys.maps:
        y = g.apply(back)
        total += (root * np.sqrt(partition.evaluate(y))).sum(axis=1) * b.values(y)
    return total.real if not np.any(total.imag) else total


def verify_redundancy(a: SampledFunction, b: SampledFunction, sys: IFSystem, gamma: PiecewiseAffineMap,
                      cloud: PointCloud, tol: float, branch_tol: float = 1e-6,
                      partition: PartitionOfUnity | None = None) -> dict:
    """b(x) = sum_k sqrt(phi_k(x)) d (alpha o L)(sqrt(phi_k) b)(x) on the cloud part of supp(a).

    This is what makes (a, sum_k a sqrt(phi_k) S_hat S_hat^* sqrt(phi_k)) a
    redundancy.  A partition violating the neighbourhood conditions makes
    the identity fail; the offenders are listed.
    """
    margin = _margin(cloud, tol)
    inside = np.abs(a.values(cloud.points)) > 0
    support = PointCloud(cloud.points[inside].reshape(-1, sys.dimension), cloud.resolution)
    if partition is None:
        partition = build_partition(sys, support, cloud, branch_tol)
    pts = support.points[_away_from_jumps(sys, gamma, support.points, margin)]
    got = redundancy_values(b, sys, gamma, partition, pts)
    err = np.abs(got - b.values(pts))
    res = float(err.max()) if len(err) else 0.0
    literal = float(np.abs(got / sys.d - b.values(pts)).max()) if len(err) else 0.0
    order = np.argsort(-err)[:5]
    return {
        "check": "redundancy",
        "status": "pass" if res <= tol else "fail",
        "residual": res,
        "unscaled_residual": literal,
        "points": len(pts),
        "partition_size": len(partition),
        "offenders": [{"x": pts[k].tolist(), "error": float(err[k])} for k in order if err[k] > tol],
        "tolerances": {"residual": tol, "branch": branch_tol, "resolution": cloud.resolution},
        "normalization_note": REDUNDANCY_NOTE,
    }


def check_transfer_properties(a: SampledFunction, sys: IFSystem, gamma: PiecewiseAffineMap,
                              cloud: PointCloud, tol: float = 1e-12) -> dict:
    """L(1) = 1, L(alpha(a)) = a, positivity of L on |a|^2 and sup |alpha(a)| >= sup over gamma(K) of |a|."""
    pts = cloud.points[_away_from_jumps(sys, gamma, cloud.points, _margin(cloud, tol))]
    one = transfer(SampledFunction.constant(1), sys).values(pts)
    cond = transfer(alpha(a, gamma), sys).values(pts) - a.values(pts)
    pos = transfer(a.conjugate() * a, sys).values(pts)
    sup_alpha = float(np.abs(alpha(a, gamma).values(cloud.points)).max())
    sup_range = float(np.abs(a.values(gamma.apply(cloud.points))).max())
    return {
        "unital": float(np.abs(one - 1).max()) <= tol,
        "conditional_expectation": float(np.abs(cond).max()) <= tol,
        "positive": bool(np.all(np.real(pos) >= -tol)),
        "alpha_isometric": sup_alpha + tol >= sup_range,
    }


__all__ = [
    "REDUNDANCY_NOTE", "TOEPLITZ_NOTE", "alpha", "check_transfer_properties", "redundancy_values",
    "s_hat", "transfer", "verify_exel_gauge", "verify_left_inverse", "verify_redundancy",
    "verify_toeplitz", "verify_transfer_identity",
]
