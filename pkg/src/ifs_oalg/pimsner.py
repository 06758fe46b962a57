"""The correspondence E = C(G) over A = C(K) and its covariant pair (iota, psi).

At truncation depth n the pair is

    iota(a, n) = sum_{|w|=n} a(x_w) S_w S_w^*
    psi(xi, n) = sum_{i, |w|=n} xi_i(x_w) S_{iw} S_w^*

with x_w the canonical coded points.  Because x_{iw} = gamma_i(x_w) holds
exactly, the first two covariance conditions hold termwise when iota is
taken one level deeper than psi, and are verified to the literal zero
element.  The third condition goes through a partition of unity and is
checked in floating point.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .algebra import AlgebraElement, gauge, multiply, normal_form, shift_element, truncation_norm, \
    unit_scalar, _term_json
from .branch import BranchReport, PartitionOfUnity, build_partition, check_cograph_separation
from .codemap import coded_points
from .errors import IllDefinedCographFunction, NotCographSeparated
from .exact import is_exact
from .functions import SampledFunction, apply_affine, is_array_point
from .ifs import IFSystem, PointCloud, diameter_bound

NORMALIZATION_NOTE = (
    "generators are s_i = S_(i) S_()^* with no d^(1/2) factor; scaling them by d^(1/2) "
    "would give s_i^* s_i = d instead of 1, contradicting psi(1)^* psi(1) = iota(<1,1>) = d"
)
CANONICAL_TAIL_NOTE = "coded points x_w use the fixed point of the first map as tail"


class CographFunction:
    """xi on the union of cographs, stored as the d functions xi_i(y) = xi(gamma_i(y), y)."""

    def __init__(self, components: Sequence[SampledFunction]):
        self.components = tuple(components)
        if not self.components:
            raise ValueError("need at least one component")

    @property
    def d(self) -> int:
        return len(self.components)

    @property
    def lipschitz(self) -> float:
        return max(c.lipschitz for c in self.components)

    @property
    def sup(self) -> float:
        return max(c.sup for c in self.components)

    def __getitem__(self, i: int) -> SampledFunction:
        """1-indexed component."""
        return self.components[i - 1]

    def component_values(self, points: np.ndarray) -> np.ndarray:
        """(d, N) array of xi_i(y)."""
        return np.array([c.values(points) for c in self.components])

    def __add__(self, other: "CographFunction") -> "CographFunction":
        _same_d(self, other)
        return CographFunction([p + q for p, q in zip(self.components, other.components)])

    def __mul__(self, scalar) -> "CographFunction":
        return CographFunction([scalar * c for c in self.components])

    __rmul__ = __mul__

    def __repr__(self):
        return f"CographFunction(d={self.d}, L={self.lipschitz:g})"

    @classmethod
    def constant(cls, c, d: int) -> "CographFunction":
        return cls([SampledFunction.constant(c) for _ in range(d)])

    @classmethod
    def indicator(cls, i: int, d: int) -> "CographFunction":
        """chi of the i-th cograph (well defined when the cographs are disjoint)."""
        return cls([SampledFunction.constant(1 if j == i else 0) for j in range(1, d + 1)])

    @classmethod
    def from_function(cls, f: Callable, sys: IFSystem, lipschitz: float, sup: float = math.inf) -> "CographFunction":
        """From f(x, y) on K x K; ``lipschitz`` must bound y -> f(gamma_i(y), y) for every i."""
        comps = []
        for g in sys.maps:
            comps.append(SampledFunction(lambda y, g=g: f(apply_affine(g, y), y), lipschitz, sup))
        return cls(comps)

    @classmethod
    def product(cls, a: SampledFunction, b: SampledFunction, sys: IFSystem) -> "CographFunction":
        """(x, y) -> a(x) b(y)."""
        return cls([a.compose(g) * b for g in sys.maps])


def _same_d(xi: CographFunction, eta: CographFunction):
    if xi.d != eta.d:
        raise ValueError(f"cograph functions over {xi.d} and {eta.d} letters")


def module_action(a: SampledFunction, xi: CographFunction, b: SampledFunction, sys: IFSystem) -> CographFunction:
    """phi(a) xi b: components a(gamma_i(y)) xi_i(y) b(y)."""
    if xi.d != sys.d:
        raise ValueError("cograph function and system have different d")
    return CographFunction([a.compose(g) * c * b for g, c in zip(sys.maps, xi.components)])


def module_inner(xi: CographFunction, eta: CographFunction) -> SampledFunction:
    """<xi, eta>_A (y) = sum_i conj(xi_i(y)) eta_i(y)."""
    _same_d(xi, eta)
    total = xi.components[0].conjugate() * eta.components[0]
    for p, q in zip(xi.components[1:], eta.components[1:]):
        total = total + p.conjugate() * q
    return total


def module_norm(xi: CographFunction, cloud: PointCloud) -> float:
    vals = xi.component_values(cloud.points)
    return float(np.sqrt((np.abs(vals) ** 2).sum(axis=0)).max())


@lru_cache(maxsize=64)
def _coinciding_pairs(sys: IFSystem) -> tuple[tuple[int, int], ...]:
    """Pairs (i, j) for which gamma_i(y) = gamma_j(y) has any solution at all."""
    out = []
    for i in range(sys.d):
        for j in range(i + 1, sys.d):
            gi, gj = sys.maps[i], sys.maps[j]
            if gi.matrix == gj.matrix and gi.offset != gj.offset:
                continue
            out.append((i, j))
    return tuple(out)


def check_well_defined(xi: CographFunction, sys: IFSystem, points, tol: float = 0.0) -> list[dict]:
    """Points y where gamma_i(y) = gamma_j(y) (within tol) but xi_i(y) != xi_j(y).

    For exact points and tol == 0 the comparison is exact; otherwise values
    may differ by L * tol + tol.
    """
    bad = []
    pairs = _coinciding_pairs(sys)
    if not pairs:
        return bad
    for y in points:
        for i, j in pairs:
            gi, gj = sys.maps[i](y), sys.maps[j](y)
            if tol == 0 and all(is_exact(v) for v in gi + gj):
                if gi != gj:
                    continue
                vi, vj = xi.components[i](y), xi.components[j](y)
                ok = vi == vj
            else:
                gap = math.dist([float(v) for v in gi], [float(v) for v in gj])
                if gap > tol:
                    continue
                vi, vj = xi.components[i](y), xi.components[j](y)
                ok = abs(complex(vi) - complex(vj)) <= xi.lipschitz * tol + tol
            if not ok:
                bad.append({"point": [float(v) for v in y], "maps": [i + 1, j + 1],
                            "values": [str(vi), str(vj)]})
    return bad


def iota(a: SampledFunction, sys: IFSystem, depth: int) -> AlgebraElement:
    """sum_{|w|=n} a(x_w) S_w S_w^*."""
    pts = coded_points(sys, depth)
    return AlgebraElement._raw(sys.d, {(w, w): a(x) for w, x in pts.items()})


def psi(xi: CographFunction, sys: IFSystem, depth: int) -> AlgebraElement:
    """sum_{i, |w|=n} xi_i(x_w) S_{iw} S_w^*.

    Raises IllDefinedCographFunction if xi separates two cograph points that
    coincide at some coded point.
    """
    if xi.d != sys.d:
        raise ValueError("cograph function and system have different d")
    pts = coded_points(sys, depth)
    bad = check_well_defined(xi, sys, pts.values())
    if bad:
        raise IllDefinedCographFunction(f"xi is not a function on the cographs: {bad[0]}")
    terms = {}
    for i, comp in enumerate(xi.components, 1):
        for w, x in pts.items():
            terms[((i,) + w, w)] = comp(x)
    return AlgebraElement._raw(sys.d, terms)


def _exact_report(check: str, depth: int, residual: AlgebraElement, **extra) -> dict:
    res = normal_form(residual)
    zero = not res.terms
    out = {
        "check": check,
        "depth": depth,
        "status": "exact" if zero else "fail",
        "residual": "exact_zero" if zero else truncation_norm(res),
        "residual_terms": len(res.terms),
        "tolerances": {"coefficients": "exact"},
        "normalization_note": NORMALIZATION_NOTE,
    }
    if not zero:
        out["first_terms"] = [_term_json(k, c) for k, c in res.sorted_terms()[:5]]
    out.update(extra)
    return out


def verify_condition_i(a: SampledFunction, xi: CographFunction, b: SampledFunction,
                       sys: IFSystem, depth: int) -> dict:
    """psi(phi(a) xi b, n) - iota(a, n+1) psi(xi, n) iota(b, n)."""
    lhs = psi(module_action(a, xi, b, sys), sys, depth)
    rhs = multiply(multiply(iota(a, sys, depth + 1), psi(xi, sys, depth)), iota(b, sys, depth))
    return _exact_report("condition_i", depth, lhs - rhs)


def verify_condition_ii(xi: CographFunction, eta: CographFunction, sys: IFSystem, depth: int) -> dict:
    """psi(xi, n)^* psi(eta, n) - iota(<xi, eta>, n)."""
    lhs = multiply(psi(xi, sys, depth).star, psi(eta, sys, depth))
    return _exact_report("condition_ii", depth, lhs - iota(module_inner(xi, eta), sys, depth))


class _PartitionSqrt:
    """Evaluator of sqrt(phi_k) for one ball of a partition, exact points converted to float."""

    def __init__(self, partition: PartitionOfUnity, k: int):
        self.partition = partition
        self.k = k

    def __call__(self, x):
        if is_array_point(x):
            return np.sqrt(self.partition.evaluate(np.column_stack(x))[:, self.k])
        return float(np.sqrt(self.partition.evaluate([[float(v) for v in x]])[0, self.k]))


def condition_iii_support(a: SampledFunction, sys: IFSystem, cloud: PointCloud, depth: int) -> PointCloud:
    """Cloud points and depth-(n+1) coded points where a does not vanish."""
    pts = [cloud.points[np.abs(a.values(cloud.points)) > 0]]
    coded = coded_points(sys, depth + 1)
    pts.append(np.array([[float(v) for v in x] for x in coded.values() if a(x) != 0]).reshape(-1, sys.dimension))
    return PointCloud(np.concatenate(pts), cloud.resolution)


def verify_condition_iii(a: SampledFunction, sys: IFSystem, cloud: PointCloud, depth: int,
                         tol: float = 1e-10, branch_tol: float = 1e-6,
                         partition: PartitionOfUnity | None = None) -> dict:
    """sum_k psi(xi_k, n) psi(eta_k, n)^* - iota(a, n+1) with xi_k = a sqrt(phi_k), eta_k = sqrt(phi_k).

    Without an explicit partition one is built over the support of a, which
    raises OnBranchSet when that support meets the branch set.
    """
    support = condition_iii_support(a, sys, cloud, depth)
    if partition is None:
        if len(support) == 0:
            partition = PartitionOfUnity(np.zeros((0, sys.dimension)), np.zeros(0))
        else:
            partition = build_partition(sys, support, cloud, branch_tol)
    total = AlgebraElement.zero(sys.d)
    for k in range(len(partition)):
        root = SampledFunction(_PartitionSqrt(partition, k), math.inf, 1.0)
        xi_k = CographFunction([(a * root).compose(g) for g in sys.maps])
        eta_k = CographFunction([root.compose(g) for g in sys.maps])
        total = total + multiply(psi(xi_k, sys, depth), psi(eta_k, sys, depth).star)
    residual = total - iota(a, sys, depth + 1)
    norm = truncation_norm(residual) if residual.terms else 0.0
    return {
        "check": "condition_iii",
        "depth": depth,
        "status": "pass" if norm <= tol else "fail",
        "residual": norm,
        "tolerances": {"residual": tol, "branch": branch_tol, "resolution": cloud.resolution},
        "partition_size": len(partition),
        "certification": partition.certify(sys, cloud, branch_tol) if len(partition) else [],
        "normalization_note": NORMALIZATION_NOTE,
    }


def verify_gauge(a: SampledFunction, xi: CographFunction, sys: IFSystem, depth: int, z) -> dict:
    """gauge fixes iota(a, n) and multiplies psi(xi, n) by z, exactly."""
    u = unit_scalar(z)
    ia = iota(a, sys, depth)
    px = psi(xi, sys, depth)
    r_iota = gauge(ia, z) - ia
    r_psi = gauge(px, z) - u * px
    rep = _exact_report("gauge", depth, r_iota + r_psi, z=str(u))
    rep["iota_status"] = "exact" if r_iota.is_zero() else "fail"
    rep["psi_status"] = "exact" if r_psi.is_zero() else "fail"
    return rep


def verify_generators(a: SampledFunction, b: SampledFunction, sys: IFSystem, depth: int) -> dict:
    """psi((x, y) -> a(x) b(y), n) = iota(a, n+1) S iota(b, n)."""
    lhs = psi(CographFunction.product(a, b, sys), sys, depth)
    rhs = multiply(multiply(iota(a, sys, depth + 1), shift_element(sys.d)), iota(b, sys, depth))
    return _exact_report("generators", depth, lhs - rhs)


def verify_cograph_generators(sys: IFSystem, cloud: PointCloud, depth: int = 0, tol: float = 1e-6) -> dict:
    """T_i = psi(chi_i, n) satisfy the Cuntz relations exactly on a cograph-separated system."""
    separated, gap = check_cograph_separation(sys, cloud, tol)
    if not separated:
        raise NotCographSeparated(f"cographs meet (min gap {gap:.3g} <= tol {tol:g})")
    T = [psi(CographFunction.indicator(i, sys.d), sys, depth) for i in range(1, sys.d + 1)]
    one = AlgebraElement.identity(sys.d)
    residual = {}
    for i, ti in enumerate(T, 1):
        for j, tj in enumerate(T, 1):
            residual[f"{i},{j}"] = normal_form(multiply(ti.star, tj) - (one if i == j else 0 * one))
    total = AlgebraElement.zero(sys.d)
    for t in T:
        total = total + multiply(t, t.star)
    residual["sum"] = normal_form(total - one)
    zero = all(not r.terms for r in residual.values())
    return {
        "check": "cograph",
        "depth": depth,
        "d": sys.d,
        "status": "exact" if zero else "fail",
        "residual": "exact_zero" if zero else max(truncation_norm(r) for r in residual.values() if r.terms),
        "nonzero_relations": sorted(k for k, r in residual.items() if r.terms),
        "cograph_gap": gap,
        "tolerances": {"separation": tol, "coefficients": "exact"},
        "normalization_note": NORMALIZATION_NOTE,
    }


def ideal_member(a: SampledFunction, report: BranchReport, tol: float) -> bool:
    """a lies in J_E iff it vanishes on the branched points."""
    pts = report.branched_points.points
    if len(pts) == 0:
        return True
    return bool(np.abs(a.values(pts)).max() <= tol)


def refinement_gap(xi: CographFunction, sys: IFSystem, depth: int) -> float:
    """truncation_norm(psi(xi, n+1) - psi(xi, n))."""
    diff = psi(xi, sys, depth + 1) - psi(xi, sys, depth)
    return truncation_norm(diff) if diff.terms else 0.0


def refinement_bound(xi: CographFunction, sys: IFSystem, depth: int, diam: float) -> float:
    return xi.lipschitz * sys.ratio**depth * diam


def iota_sup_bound(a: SampledFunction, sys: IFSystem, cloud: PointCloud, depth: int) -> dict:
    """sup over the cloud of |a| against max |a(x_w)| + L (c^n diam + resolution)."""
    coded = np.array([[float(v) for v in x] for x in coded_points(sys, depth).values()])
    on_words = float(np.abs(a.values(coded)).max())
    bound = on_words + a.lipschitz * (sys.ratio**depth * diameter_bound(cloud) + cloud.resolution)
    sup = float(np.abs(a.values(cloud.points)).max())
    return {"sup": sup, "max_on_words": on_words, "bound": bound, "holds": sup <= bound}
