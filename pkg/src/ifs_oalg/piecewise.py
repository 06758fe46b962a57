"""Piecewise-affine maps on boxes, used as user-supplied left inverses."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations

import numpy as np

from .errors import DimensionMismatch
from .exact import format_rational, to_fraction

BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class Piece:
    lower: tuple[Fraction, ...]
    upper: tuple[Fraction, ...]
    matrix: tuple[tuple[Fraction, ...], ...]
    offset: tuple[Fraction, ...]

    def __post_init__(self):
        for name in ("lower", "upper", "offset"):
            object.__setattr__(self, name, tuple(to_fraction(v) for v in getattr(self, name)))
        object.__setattr__(self, "matrix",
                           tuple(tuple(to_fraction(v) for v in row) for row in self.matrix))
        n = len(self.offset)
        if len(self.lower) != n or len(self.upper) != n or len(self.matrix) != n:
            raise DimensionMismatch("piece bounds, matrix and offset disagree in dimension")

    def contains(self, x, slack=0.0) -> bool:
        return all(lo - slack <= xi <= hi + slack for lo, xi, hi in zip(self.lower, x, self.upper))

    def __call__(self, x):
        return tuple(sum(a * xi for a, xi in zip(row, x)) + bi
                     for row, bi in zip(self.matrix, self.offset))


class PiecewiseAffineMap:
    """Closed boxes with affine formulas; the first box containing a point wins.

    Listing order therefore decides the value on shared faces, which is how
    a discontinuous map (the doubling map) is made single-valued.
    """

    def __init__(self, pieces):
        self.pieces = tuple(p if isinstance(p, Piece) else Piece(**p) for p in pieces)
        if not self.pieces:
            raise ValueError("piecewise map needs at least one piece")
        dims = {len(p.offset) for p in self.pieces}
        if len(dims) != 1:
            raise DimensionMismatch("pieces of different dimension")
        self.dimension = dims.pop()

    @classmethod
    def from_json(cls, data: dict) -> "PiecewiseAffineMap":
        return cls([Piece(lower=p["lower"], upper=p["upper"], matrix=p["matrix"], offset=p["offset"])
                    for p in data["pieces"]])

    def to_json(self) -> dict:
        return {"pieces": [
            {"lower": [format_rational(v) for v in p.lower],
             "upper": [format_rational(v) for v in p.upper],
             "matrix": [[format_rational(v) for v in row] for row in p.matrix],
             "offset": [format_rational(v) for v in p.offset]}
            for p in self.pieces]}

    def piece_index(self, x, slack=BOUNDARY_TOL) -> int | None:
        for k, p in enumerate(self.pieces):
            if p.contains(x):
                return k
        for k, p in enumerate(self.pieces):
            if p.contains(x, slack):
                return k
        return None

    def __call__(self, x):
        k = self.piece_index(x)
        if k is None:
            raise ValueError(f"point {tuple(map(float, x))} lies outside every piece")
        return self.pieces[k](x)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Float evaluation on an (N, n) array; NaN rows where no piece applies."""
        out = np.full(points.shape, np.nan)
        done = np.zeros(len(points), dtype=bool)
        for slack in (0.0, BOUNDARY_TOL):
            for p in self.pieces:
                lo = np.array([float(v) for v in p.lower]) - slack
                hi = np.array([float(v) for v in p.upper]) + slack
                inside = ~done & np.all((points >= lo) & (points <= hi), axis=1)
                if inside.any():
                    A = np.array([[float(v) for v in row] for row in p.matrix])
                    b = np.array([float(v) for v in p.offset])
                    out[inside] = points[inside] @ A.T + b
                    done |= inside
        return out

    @cached_property
    def lipschitz(self) -> float:
        return max(float(np.linalg.norm(np.array([[float(v) for v in r] for r in p.matrix]), 2))
                   for p in self.pieces)

    @cached_property
    def discontinuities(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Shared faces (as float boxes) on which two pieces disagree.

        Two affine formulas agree on a box iff they agree at its corners.
        """
        faces = []
        for p, q in combinations(self.pieces, 2):
            lo = tuple(max(a, b) for a, b in zip(p.lower, q.lower))
            hi = tuple(min(a, b) for a, b in zip(p.upper, q.upper))
            if any(l > h for l, h in zip(lo, hi)):
                continue
            corners = _corners(lo, hi)
            if any(max(abs(float(u - v)) for u, v in zip(p(c), q(c))) > BOUNDARY_TOL for c in corners):
                faces.append((np.array([float(v) for v in lo]), np.array([float(v) for v in hi])))
        return faces

    @property
    def continuous(self) -> bool:
        return not self.discontinuities

    def near_discontinuity(self, points: np.ndarray, margin: float) -> np.ndarray:
        """Mask of rows within ``margin`` of a face where the formulas disagree."""
        mask = np.zeros(len(points), dtype=bool)
        for lo, hi in self.discontinuities:
            gap = np.linalg.norm(points - np.clip(points, lo, hi), axis=1)
            mask |= gap <= margin
        return mask

    def warn_if_discontinuous(self):
        if not self.continuous:
            warnings.warn("left inverse is discontinuous; identities are checked away from its jumps",
                          stacklevel=3)


def _corners(lo, hi):
    corners = [()]
    for l, h in zip(lo, hi):
        corners = [c + (v,) for c in corners for v in ({l, h} if l != h else {l})]
    return corners
