"""Continuous functions on K given by closed forms or sample tables.

An evaluator takes a point as a sequence of coordinates.  Coordinates are
either scalars (Fraction for exact evaluation at coded points, or float)
or equal-length numpy arrays, in which case the evaluator is vectorised
over a cloud.  Every function carries a Lipschitz constant and a sup bound
so that approximate assertions have an explicit modulus of continuity.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .exact import Cyclotomic, conj, to_fraction
from .ifs import AffineContraction, PointCloud

Evaluator = Callable[[Sequence], object]


def is_array_point(x) -> bool:
    return any(isinstance(v, np.ndarray) for v in x)


def columns(points: np.ndarray) -> tuple[np.ndarray, ...]:
    return tuple(np.asarray(points, dtype=float).T)


def apply_affine(g: AffineContraction, x):
    """g(x) for an exact point or for a tuple of coordinate arrays."""
    if is_array_point(x):
        return columns(np.column_stack(x) @ g.A.T + g.b)
    return g(x)


def _float_coeff(c):
    if isinstance(c, Cyclotomic):
        z = complex(c)
        return z.real if z.imag == 0 else z
    if isinstance(c, Fraction):
        return float(c)
    return c


def _max0(v):
    if isinstance(v, np.ndarray):
        return np.maximum(v, 0.0)
    return v if v > 0 else 0 * v


class SampledFunction:
    """f: K -> C with Lipschitz constant ``lipschitz`` and |f| <= ``sup``."""

    def __init__(self, evaluator: Evaluator, lipschitz: float, sup: float = math.inf, label: str = ""):
        if lipschitz < 0:
            raise ValueError("Lipschitz constant must be nonnegative")
        self.evaluator = evaluator
        self.lipschitz = float(lipschitz)
        self.sup = float(sup)
        self.label = label

    def __call__(self, x):
        return self.evaluator(tuple(x))

    def values(self, points: np.ndarray) -> np.ndarray:
        """Vectorised evaluation on an (N, n) array."""
        pts = np.asarray(points, dtype=float)
        out = self.evaluator(columns(pts))
        out = np.asarray(out)
        if out.dtype == object:
            out = out.astype(complex)
        out = np.broadcast_to(out, (len(pts),)).copy()
        if np.iscomplexobj(out) and not np.any(out.imag):
            out = out.real
        return out

    def __repr__(self):
        return f"SampledFunction({self.label or '?'}, L={self.lipschitz:g})"

    # constructors
    @classmethod
    def constant(cls, c) -> "SampledFunction":
        cf = _float_coeff(c)
        return cls(lambda x: cf if is_array_point(x) else c, 0.0, abs(complex(cf)), label=f"const {c}")

    @classmethod
    def coordinate(cls, k: int = 0, radius: float = 1.0) -> "SampledFunction":
        return cls(lambda x: x[k], 1.0, radius, label=f"x[{k}]")

    @classmethod
    def polynomial(cls, coeffs, radius: float = 1.0) -> "SampledFunction":
        """sum c_alpha x^alpha.

        ``coeffs`` maps exponent tuples to coefficients; in one variable a
        plain list [c0, c1, ...] or {k: c} also works.  ``radius`` bounds the
        coordinates on K and enters the Lipschitz and sup estimates.
        """
        if isinstance(coeffs, (list, tuple)):
            coeffs = dict(enumerate(coeffs))
        terms = {}
        for alpha, c in coeffs.items():
            alpha = (alpha,) if isinstance(alpha, int) else tuple(alpha)
            if not isinstance(c, Cyclotomic):
                c = to_fraction(c)
            if c != 0:
                terms[alpha] = c
        fterms = {a: _float_coeff(c) for a, c in terms.items()}

        def ev(x):
            src = fterms if is_array_point(x) else terms
            total = 0
            for alpha, c in src.items():
                mono = c
                for xi, k in zip(x, alpha):
                    if k:
                        mono = mono * xi**k
                total = total + mono
            return total

        B = float(radius)
        lip = sum(abs(complex(_float_coeff(c))) * sum(alpha) * B ** max(sum(alpha) - 1, 0)
                  for alpha, c in terms.items())
        sup = sum(abs(complex(_float_coeff(c))) * B ** sum(alpha) for alpha, c in terms.items())
        return cls(ev, lip, sup, label=f"poly {len(terms)} terms")

    @classmethod
    def hat(cls, center, radius, height=1) -> "SampledFunction":
        """height * max(0, 1 - |x - center| / radius); exact in one dimension."""
        center = tuple(to_fraction(v) for v in np.atleast_1d(center).tolist()) \
            if not isinstance(center, tuple) else tuple(to_fraction(v) for v in center)
        radius = to_fraction(radius)
        height = height if isinstance(height, Cyclotomic) else to_fraction(height)
        fc = np.array([float(v) for v in center])
        fr, fh = float(radius), _float_coeff(height)

        def ev(x):
            if is_array_point(x):
                dist = np.linalg.norm(np.column_stack(x) - fc, axis=1)
                return fh * np.maximum(0.0, 1.0 - dist / fr)
            if len(center) == 1:
                dist = abs(x[0] - center[0])
            else:
                dist = math.dist([float(v) for v in x], fc)
            val = 1 - dist / radius if isinstance(dist, Fraction) else 1.0 - dist / fr
            return height * _max0(val)

        return cls(ev, abs(complex(fh)) / fr, abs(complex(fh)), label="hat")

    @classmethod
    def table(cls, cloud: PointCloud, values: Sequence, neighbours: int = 8) -> "SampledFunction":
        """Nearest-point lookup; Lipschitz = 1.5 x the largest neighbour difference quotient."""
        vals = np.asarray(values)
        if len(vals) != len(cloud):
            raise ValueError("one value per cloud point")
        tree = cKDTree(cloud.points)
        k = min(neighbours + 1, len(cloud))
        lip = 0.0
        if k > 1:
            dist, idx = tree.query(cloud.points, k=k)
            diff = np.abs(vals[idx[:, 1:]] - vals[:, None])
            with np.errstate(divide="ignore", invalid="ignore"):
                q = np.where(dist[:, 1:] > 0, diff / dist[:, 1:], 0.0)
            lip = 1.5 * float(q.max())

        def ev(x):
            if is_array_point(x):
                return vals[tree.query(np.column_stack(x))[1]]
            return vals[tree.query([float(v) for v in x])[1]].item()

        return cls(ev, lip, float(np.abs(vals).max()), label="table")

    # arithmetic
    def __add__(self, other):
        other = _lift(other)
        return SampledFunction(lambda x: self.evaluator(x) + other.evaluator(x),
                               self.lipschitz + other.lipschitz, self.sup + other.sup)

    __radd__ = __add__

    def __neg__(self):
        return SampledFunction(lambda x: -self.evaluator(x), self.lipschitz, self.sup)

    def __sub__(self, other):
        return self + (-_lift(other))

    def __rsub__(self, other):
        return _lift(other) + (-self)

    def __mul__(self, other):
        other = _lift(other)
        return SampledFunction(lambda x: self.evaluator(x) * other.evaluator(x),
                               _product_lipschitz(self, other), self.sup * other.sup)

    __rmul__ = __mul__

    def conjugate(self) -> "SampledFunction":
        def ev(x):
            v = self.evaluator(x)
            return np.conj(v) if isinstance(v, np.ndarray) else conj(v)
        return SampledFunction(ev, self.lipschitz, self.sup)

    def compose(self, g: AffineContraction) -> "SampledFunction":
        """x -> f(g(x))."""
        return SampledFunction(lambda x: self.evaluator(apply_affine(g, x)),
                               self.lipschitz * g.ratio, self.sup)


def _lift(v) -> SampledFunction:
    return v if isinstance(v, SampledFunction) else SampledFunction.constant(v)


def _product_lipschitz(f: SampledFunction, g: SampledFunction) -> float:
    # 0 * inf would be nan: a constant factor contributes nothing
    return sum(0.0 if la == 0 else la * sb for la, sb in ((f.lipschitz, g.sup), (g.lipschitz, f.sup)))


def spot_check_lipschitz(f: SampledFunction, cloud: PointCloud, pairs: int = 2000, seed: int = 0) -> float:
    """Largest sampled |f(x)-f(y)| - L|x-y|; nonpositive when the bound holds."""
    rng = np.random.default_rng(seed)
    i = rng.integers(0, len(cloud), pairs)
    j = rng.integers(0, len(cloud), pairs)
    vals = f.values(cloud.points)
    gap = np.abs(vals[i] - vals[j]) - f.lipschitz * np.linalg.norm(cloud.points[i] - cloud.points[j], axis=1)
    return float(gap.max())


def as_function(value) -> SampledFunction:
    """Constants and polynomials given as dicts or lists become functions."""
    if isinstance(value, SampledFunction):
        return value
    if isinstance(value, (Mapping, list)):
        return SampledFunction.polynomial(value)
    return SampledFunction.constant(value)
