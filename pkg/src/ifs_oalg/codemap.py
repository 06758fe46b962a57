"""Finite words, the shift and its sections, the code map and the lifted system.

Words are plain tuples of 1-indexed letters; infinite sequences never
appear, only prefixes together with the tail bound ``c**n * diam``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterator, Sequence

import numpy as np

from .errors import BudgetExceeded, EmptyWord, LetterOutOfRange
from .ifs import IFSystem, point_cap

Word = tuple[int, ...]

WORD_CAP = 3**10


def check_word(w: Sequence[int], d: int) -> Word:
    w = tuple(int(i) for i in w)
    for i in w:
        if not 1 <= i <= d:
            raise LetterOutOfRange(f"letter {i} outside 1..{d}")
    return w


def parse_word(text: str, d: int) -> Word:
    """"122" -> (1, 2, 2); letters are single digits."""
    if not text.isdigit() and text != "":
        raise LetterOutOfRange(f"word {text!r} is not a digit string")
    return check_word((int(ch) for ch in text), d)


def format_word(w: Sequence[int]) -> str:
    return "".join(str(i) for i in w)


def shift(w: Sequence[int]) -> Word:
    if not w:
        raise EmptyWord("cannot shift the empty word")
    return tuple(w[1:])


def prepend(i: int, w: Sequence[int], d: int | None = None) -> Word:
    if i < 1 or (d is not None and i > d):
        raise LetterOutOfRange(f"letter {i} outside 1..{d}")
    return (i,) + tuple(w)


def words(d: int, n: int) -> Iterator[Word]:
    """All words of length n in lexicographic order."""
    return product(range(1, d + 1), repeat=n)


def code_point(sys: IFSystem, w: Sequence[int], x=None):
    """gamma_{w_0} o ... o gamma_{w_last}(x); x defaults to the canonical base point.

    Exact when x and the maps are rational.
    """
    w = check_word(w, sys.d)
    y = sys.base_point if x is None else tuple(x)
    for i in reversed(w):
        y = sys.maps[i - 1](y)
    return y


def code_error_bound(sys: IFSystem, depth: int, diam: float) -> float:
    """Bound on |code_point(w[:depth], x) - F(w)| for any x in K and any extension."""
    if depth < 0 or diam < 0:
        raise ValueError("depth and diam must be nonnegative")
    return sys.ratio**depth * diam


@lru_cache(maxsize=64)
def coded_points(sys: IFSystem, depth: int) -> dict[Word, tuple]:
    """x_w for every word of length ``depth``, built from x_{iw} = gamma_i(x_w)."""
    cap = point_cap(WORD_CAP)
    if sys.d**depth > cap:
        raise BudgetExceeded(f"{sys.d}**{depth} words exceed the cap {cap}")
    level = {(): sys.base_point}
    for _ in range(depth):
        level = {(i + 1,) + w: g(x) for i, g in enumerate(sys.maps) for w, x in level.items()}
    return dict(sorted(level.items()))


def coded_cloud(sys: IFSystem, depth: int) -> np.ndarray:
    pts = coded_points(sys, depth)
    return np.array([[float(v) for v in x] for x in pts.values()])


@dataclass(frozen=True)
class LiftedPoint:
    base: tuple
    code: Word


class LiftedSystem:
    """The maps (x, w) -> (gamma_i(x), i w); images of distinct maps differ in their first letter."""

    def __init__(self, sys: IFSystem):
        self.sys = sys

    @property
    def d(self) -> int:
        return self.sys.d

    def apply(self, i: int, p: LiftedPoint) -> LiftedPoint:
        return LiftedPoint(self.sys[i](p.base), prepend(i, p.code, self.d))

    def maps(self):
        return [lambda p, i=i: self.apply(i, p) for i in range(1, self.d + 1)]

    @staticmethod
    def branch_of(p: LiftedPoint) -> int | None:
        """The unique map whose image contains p (its leading letter)."""
        return p.code[0] if p.code else None

    def separated(self, points: Sequence[LiftedPoint]) -> bool:
        """Strong-separation witness: images under different maps never coincide."""
        images = {}
        for i in range(1, self.d + 1):
            for p in points:
                q = self.apply(i, p)
                if images.setdefault(q, i) != i:
                    return False
        return True


def lift(sys: IFSystem) -> LiftedSystem:
    return LiftedSystem(sys)


def decode(sys: IFSystem, x, depth: int) -> Word:
    """Nearest depth-n coded point to x (finite-depth stand-in for F^{-1})."""
    pts = coded_points(sys, depth)
    keys = list(pts)
    arr = coded_cloud(sys, depth)
    k = int(np.argmin(np.linalg.norm(arr - np.asarray(x, dtype=float), axis=1)))
    return keys[k]
