"""The *-algebra of finite sums  sum c_{mu,nu} S_mu S_nu^*  over d letters.

This is the span of characteristic functions of the basic bisections of
the Cuntz groupoid; products follow the word rule

    (S_mu S_nu^*)(S_a S_b^*) = S_{mu a'} S_b^*   if a = nu a'
                             = S_mu S_{b nu'}^*  if nu = a nu'
                             = 0                 otherwise.

Coefficients are any scalars from :mod:`ifs_oalg.exact` (Fraction,
Cyclotomic) or Python floats/complex numbers.
"""

from __future__ import annotations

import numbers
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Mapping

import numpy as np

from .errors import AlphabetMismatch, DepthTooSmall, LetterOutOfRange, NotUnitModulus
from .exact import Cyclotomic, conj, format_rational, is_exact

Word = tuple[int, ...]
Key = tuple[Word, Word]


class AlgebraElement:
    __slots__ = ("d", "terms")

    def __init__(self, d: int, terms: Mapping[Key, object] | None = None):
        if d < 1:
            raise ValueError("alphabet size must be positive")
        self.d = d
        clean = {}
        for (mu, nu), c in (terms or {}).items():
            mu, nu = tuple(mu), tuple(nu)
            for i in mu + nu:
                if not 1 <= i <= d:
                    raise LetterOutOfRange(f"letter {i} outside 1..{d}")
            if c != 0:
                clean[(mu, nu)] = c
        self.terms = clean

    @classmethod
    def _raw(cls, d, terms):
        el = cls.__new__(cls)
        el.d = d
        el.terms = {k: c for k, c in terms.items() if c != 0}
        return el

    # constructors
    @classmethod
    def identity(cls, d: int) -> "AlgebraElement":
        return cls(d, {((), ()): Fraction(1)})

    @classmethod
    def zero(cls, d: int) -> "AlgebraElement":
        return cls(d)

    @classmethod
    def monomial(cls, d: int, mu, nu, c=Fraction(1)) -> "AlgebraElement":
        return cls(d, {(tuple(mu), tuple(nu)): c})

    # arithmetic
    def _check(self, other):
        if not isinstance(other, AlgebraElement):
            return False
        if other.d != self.d:
            raise AlphabetMismatch(f"alphabet sizes {self.d} and {other.d}")
        return True

    def __add__(self, other):
        if not self._check(other):
            if isinstance(other, numbers.Number) or isinstance(other, Cyclotomic):
                return self + AlgebraElement.identity(self.d) * other
            return NotImplemented
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return AlgebraElement._raw(self.d, out)

    __radd__ = __add__

    def __neg__(self):
        return AlgebraElement._raw(self.d, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return multiply(self, other)
        if isinstance(other, (numbers.Number, Cyclotomic)):
            return AlgebraElement._raw(self.d, {k: c * other for k, c in self.terms.items()})
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (numbers.Number, Cyclotomic)):
            return AlgebraElement._raw(self.d, {k: other * c for k, c in self.terms.items()})
        return NotImplemented

    def __eq__(self, other):
        """Structural equality of term maps; see :meth:`equivalent` for equality in the algebra."""
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.d == other.d and self.terms == other.terms

    __hash__ = None

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        if not self.terms:
            return f"AlgebraElement(d={self.d}, 0)"
        parts = [f"{c}*S[{_w(mu)}]S[{_w(nu)}]*" for (mu, nu), c in sorted(self.terms.items())]
        return f"AlgebraElement(d={self.d}, " + " + ".join(parts) + ")"

    # structure
    @property
    def star(self) -> "AlgebraElement":
        return adjoint(self)

    def degrees(self) -> set[int]:
        return {len(mu) - len(nu) for mu, nu in self.terms}

    def max_right_length(self) -> int:
        return max((len(nu) for _, nu in self.terms), default=0)

    def max_length(self) -> int:
        return max((max(len(mu), len(nu)) for mu, nu in self.terms), default=0)

    @property
    def exact(self) -> bool:
        return all(is_exact(c) for c in self.terms.values())

    def is_zero(self) -> bool:
        """Zero in the algebra (normal form is empty)."""
        return not normal_form(self).terms

    def equivalent(self, other: "AlgebraElement") -> bool:
        return (self - other).is_zero()

    def sorted_terms(self):
        return sorted(self.terms.items())


def _w(word):
    return "".join(map(str, word)) or "()"


def multiply(p: AlgebraElement, q: AlgebraElement) -> AlgebraElement:
    if p.d != q.d:
        raise AlphabetMismatch(f"alphabet sizes {p.d} and {q.d}")
    by_alpha = defaultdict(list)   # alpha -> [(beta, c)]
    extending = defaultdict(list)  # prefix -> [(alpha, beta, c)] for every prefix of alpha
    for (a, b), c in q.terms.items():
        by_alpha[a].append((b, c))
        for k in range(len(a) + 1):
            extending[a[:k]].append((a, b, c))
    out = {}
    for (mu, nu), c1 in p.terms.items():
        n = len(nu)
        # alpha = nu alpha'
        for a, b, c2 in extending.get(nu, ()):
            key = (mu + a[n:], b)
            out[key] = out.get(key, 0) + c1 * c2
        # nu = alpha nu', nu' nonempty
        for k in range(n):
            for b, c2 in by_alpha.get(nu[:k], ()):
                key = (mu, b + nu[k:])
                out[key] = out.get(key, 0) + c1 * c2
    return AlgebraElement._raw(p.d, out)


def adjoint(p: AlgebraElement) -> AlgebraElement:
    return AlgebraElement._raw(p.d, {(nu, mu): conj(c) for (mu, nu), c in p.terms.items()})


def generator(d: int, i: int) -> AlgebraElement:
    """s_i = S_(i) S_()^*, the characteristic function of {(i w, 1, w)}."""
    if not 1 <= i <= d:
        raise LetterOutOfRange(f"generator index {i} outside 1..{d}")
    return AlgebraElement.monomial(d, (i,), ())


def shift_element(d: int) -> AlgebraElement:
    """S = sum_i s_i: the characteristic function of {(w, 1, sigma(w))}."""
    return AlgebraElement._raw(d, {((i,), ()): Fraction(1) for i in range(1, d + 1)})


def _unit(z):
    """Normalise a gauge parameter to an exact or float unit scalar."""
    if isinstance(z, (int, Fraction)) and not isinstance(z, bool):
        # rational number of turns
        return Cyclotomic.root_of_unity(Fraction(z))
    if isinstance(z, Cyclotomic):
        if z * z.conjugate() != 1:
            raise NotUnitModulus("gauge parameter must have modulus one")
        return z
    z = complex(z)
    if abs(abs(z) - 1) > 1e-12:
        raise NotUnitModulus(f"|z| = {abs(z)} != 1")
    return z


def gauge(p: AlgebraElement, z) -> AlgebraElement:
    """beta_z: multiply the (mu, nu) coefficient by z**(|mu| - |nu|).

    ``z`` is a rational number of turns (Fraction(1, 4) is i), an exact
    unit-modulus :class:`Cyclotomic`, or a float complex of modulus one.
    """
    z = _unit(z)
    powers = {}
    out = {}
    for (mu, nu), c in p.terms.items():
        k = len(mu) - len(nu)
        if k == 0:
            out[(mu, nu)] = c
            continue
        if k not in powers:
            powers[k] = z**k
        out[(mu, nu)] = c * powers[k]
    return AlgebraElement._raw(p.d, out)


def unit_scalar(z):
    """The scalar z itself, in the same representation gauge() uses."""
    return _unit(z)


def refine(p: AlgebraElement, depth: int) -> AlgebraElement:
    """Rewrite S_mu S_nu^* = sum_i S_{mu i} S_{nu i}^* until every |mu| >= depth."""
    out = {}
    for (mu, nu), c in p.terms.items():
        k = depth - len(mu)
        if k <= 0:
            out[(mu, nu)] = out.get((mu, nu), 0) + c
            continue
        for u in product(range(1, p.d + 1), repeat=k):
            key = (mu + u, nu + u)
            out[key] = out.get(key, 0) + c
    return AlgebraElement._raw(p.d, out)


def normal_form(p: AlgebraElement, depth: int | None = None) -> AlgebraElement:
    """Refine until every right word has length exactly ``depth`` (default: the maximum).

    Monomials S_mu S_nu^* with |nu| fixed are linearly independent, so this
    is a canonical form: two elements are equal iff their normal forms at a
    common depth coincide.
    """
    n = p.max_right_length() if depth is None else depth
    if n < p.max_right_length():
        raise DepthTooSmall(f"depth {n} below the longest right word")
    out = {}
    for (mu, nu), c in p.terms.items():
        k = n - len(nu)
        for u in product(range(1, p.d + 1), repeat=k):
            key = (mu + u, nu + u)
            out[key] = out.get(key, 0) + c
    return AlgebraElement._raw(p.d, out)


def verify_cuntz(d: int) -> dict:
    """Check s_i^* s_j = delta_ij and sum_i s_i s_i^* = 1 in exact arithmetic."""
    one = AlgebraElement.identity(d)
    gens = [generator(d, i) for i in range(1, d + 1)]
    isometry = {}
    for i, si in enumerate(gens, 1):
        for j, sj in enumerate(gens, 1):
            res = normal_form(si.star * sj - (one if i == j else AlgebraElement.zero(d)))
            isometry[f"{i},{j}"] = [_term_json(k, c) for k, c in res.sorted_terms()]
    total = AlgebraElement.zero(d)
    for s in gens:
        total = total + s * s.star
    res = normal_form(total - one, 1)
    exact_zero = all(not v for v in isometry.values()) and not res.terms
    return {
        "check": "cuntz",
        "d": d,
        "isometry_residuals": isometry,
        "sum_residual": [_term_json(k, c) for k, c in res.sorted_terms()],
        "status": "exact" if exact_zero else "fail",
    }


# finite-dimensional path representation -----------------------------------

def word_index(w: Word, d: int) -> int:
    idx = 0
    for i in w:
        idx = idx * d + (i - 1)
    return idx


class SparseBlock:
    """Exact sparse matrix {(row, col): coefficient}; path matrices have one entry per term and column."""

    __slots__ = ("shape", "entries")

    def __init__(self, shape: tuple[int, int], entries: dict | None = None):
        self.shape = shape
        self.entries = {k: v for k, v in (entries or {}).items() if v != 0}

    def __getitem__(self, idx):
        return self.entries.get(idx, Fraction(0))

    def __matmul__(self, other: "SparseBlock") -> "SparseBlock":
        if self.shape[1] != other.shape[0]:
            raise ValueError(f"shapes {self.shape} and {other.shape} do not compose")
        by_col = defaultdict(list)
        for (r, c), v in self.entries.items():
            by_col[c].append((r, v))
        out = {}
        for (r, c), v in sorted(other.entries.items()):
            for r2, v2 in by_col.get(r, ()):
                out[(r2, c)] = out.get((r2, c), 0) + v2 * v
        return SparseBlock((self.shape[0], other.shape[1]), out)

    def __add__(self, other: "SparseBlock") -> "SparseBlock":
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, 0) + v
        return SparseBlock(self.shape, out)

    def __neg__(self):
        return SparseBlock(self.shape, {k: -v for k, v in self.entries.items()})

    def __eq__(self, other):
        if not isinstance(other, SparseBlock):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    __hash__ = None

    def astype(self, dtype) -> np.ndarray:
        out = np.zeros(self.shape, dtype=dtype)
        for (r, c), v in self.entries.items():
            out[r, c] = complex(v) if np.issubdtype(np.dtype(dtype), np.complexfloating) else v
        return out


@dataclass
class PathMatrix:
    """Action of an element on span{e_{v t}: |v| = depth} for a fixed aperiodic tail t.

    A term S_mu S_nu^* sends e_{nu v' t} to e_{mu v' t}, so the degree-k part
    maps the level-``depth`` space into the level-(depth + k) space.  Levels
    are mutually orthogonal, and ``blocks[k]`` holds the
    (d**(depth+k), d**depth) matrix of the degree-k part: a :class:`SparseBlock`
    for exact coefficients, a dense complex array otherwise.
    """

    d: int
    depth: int
    blocks: dict = field(default_factory=dict)

    def stacked(self) -> np.ndarray:
        if not self.blocks:
            return np.zeros((0, self.d**self.depth))
        return np.vstack([np.asarray(self.blocks[k].astype(complex)) for k in sorted(self.blocks)])

    def norm(self) -> float:
        m = self.stacked()
        if m.size == 0:
            return 0.0
        return float(np.linalg.norm(m, 2))

    def __eq__(self, other):
        if not isinstance(other, PathMatrix):
            return NotImplemented
        if (self.d, self.depth) != (other.d, other.depth):
            return False
        for k in set(self.blocks) | set(other.blocks):
            a, b = self.blocks.get(k), other.blocks.get(k)
            if isinstance(a, SparseBlock) or isinstance(b, SparseBlock):
                a = a.entries if a is not None else {}
                b = b.entries if b is not None else {}
                if a != b:
                    return False
                continue
            a = np.zeros_like(b) if a is None else a
            b = np.zeros_like(a) if b is None else b
            if not np.all(a == b):
                return False
        return True

    __hash__ = None

    def __sub__(self, other):
        blocks = {}
        for k in set(self.blocks) | set(other.blocks):
            a, b = self.blocks.get(k), other.blocks.get(k)
            if a is None:
                blocks[k] = -b
            elif b is None:
                blocks[k] = a
            else:
                blocks[k] = a + (-b)
        return PathMatrix(self.d, self.depth, blocks)


def path_matrix(p: AlgebraElement, depth: int, exact: bool | None = None) -> PathMatrix:
    """Blocks of p acting on level ``depth``; sparse exact blocks when p is exact."""
    if depth < p.max_right_length():
        raise DepthTooSmall(f"depth {depth} below the longest right word {p.max_right_length()}")
    d = p.d
    exact = p.exact if exact is None else exact
    blocks = {}
    for (mu, nu), c in p.terms.items():
        k = len(mu) - len(nu)
        if k not in blocks:
            shape = (d ** (depth + k), d**depth)
            blocks[k] = {} if exact else np.zeros(shape, dtype=complex)
        span = d ** (depth - len(nu))
        tail = np.arange(span)
        cols = word_index(nu, d) * span + tail
        rows = word_index(mu, d) * span + tail
        if exact:
            blk = blocks[k]
            for r, col in zip(rows.tolist(), cols.tolist()):
                blk[(r, col)] = blk.get((r, col), 0) + c
        else:
            blocks[k][rows, cols] += complex(c)
    if exact:
        blocks = {k: SparseBlock((d ** (depth + k), d**depth), e) for k, e in blocks.items()}
    return PathMatrix(d, depth, blocks)


def left_multiply(p: AlgebraElement, m: PathMatrix) -> PathMatrix:
    """The path matrix of p composed after m (p acts on every level m reaches)."""
    out = {}
    for k, blk in m.blocks.items():
        pk = path_matrix(p, m.depth + k, exact=isinstance(blk, SparseBlock))
        for j, pblk in pk.blocks.items():
            prod = pblk @ blk
            out[k + j] = out[k + j] + prod if k + j in out else prod
    return PathMatrix(m.d, m.depth, out)


def product_depth(p: AlgebraElement, q: AlgebraElement) -> int:
    """Smallest level on which p q is represented by composing the two path matrices."""
    lo = min(q.degrees(), default=0)
    return max(q.max_right_length(), p.max_right_length() - lo, 0)


def truncation_norm(p: AlgebraElement, depth: int | None = None) -> float:
    """Norm of p on the level-``depth`` subspace: a lower bound for its C*-norm."""
    n = p.max_right_length() if depth is None else depth
    return path_matrix(p, n, exact=False).norm()


# elements scaled by powers of sqrt(d) --------------------------------------

class RootScaled:
    """d**(half_power / 2) * element, keeping the irrational factor symbolic."""

    __slots__ = ("element", "half_power")

    def __init__(self, element: AlgebraElement, half_power: int = 0):
        self.element = element
        self.half_power = half_power

    @property
    def d(self):
        return self.element.d

    def __mul__(self, other):
        if isinstance(other, RootScaled):
            return RootScaled(self.element * other.element, self.half_power + other.half_power)
        if isinstance(other, AlgebraElement):
            return RootScaled(self.element * other, self.half_power)
        return RootScaled(self.element * other, self.half_power)

    def __rmul__(self, other):
        if isinstance(other, AlgebraElement):
            return RootScaled(other * self.element, self.half_power)
        return RootScaled(other * self.element, self.half_power)

    def _align(self, other):
        if not isinstance(other, RootScaled):
            other = RootScaled(other, 0)
        diff = self.half_power - other.half_power
        if diff % 2:
            raise ValueError("cannot combine terms with odd relative power of sqrt(d)")
        if diff >= 0:
            return self.element * Fraction(self.d) ** (diff // 2), other.element, other.half_power
        return self.element, other.element * Fraction(self.d) ** (-diff // 2), self.half_power

    def __add__(self, other):
        a, b, h = self._align(other)
        return RootScaled(a + b, h)

    def __sub__(self, other):
        a, b, h = self._align(other)
        return RootScaled(a - b, h)

    @property
    def star(self):
        return RootScaled(adjoint(self.element), self.half_power)

    def gauge(self, z):
        return RootScaled(gauge(self.element, z), self.half_power)

    def is_zero(self) -> bool:
        return self.element.is_zero()

    def __repr__(self):
        return f"d^({self.half_power}/2) * {self.element!r}"


# serialisation -------------------------------------------------------------

def _coeff_json(c) -> dict:
    if isinstance(c, (int, Fraction)):
        return {"re": format_rational(c), "im": "0"}
    if isinstance(c, Cyclotomic):
        parts = c.rational_parts()
        if parts is not None:
            return {"re": format_rational(parts[0]), "im": format_rational(parts[1])}
        return {"zeta_order": c.order, "zeta_coeffs": [format_rational(v) for v in c.coeffs]}
    z = complex(c)
    return {"re": repr(z.real), "im": repr(z.imag)}


def _term_json(key, c) -> dict:
    mu, nu = key
    return {"mu": "".join(map(str, mu)), "nu": "".join(map(str, nu)), **_coeff_json(c)}


def _coeff_from_json(t: dict):
    if "zeta_order" in t:
        return Cyclotomic(int(t["zeta_order"]), [Fraction(v) for v in t["zeta_coeffs"]])
    re, im = Fraction(t.get("re", "0")), Fraction(t.get("im", "0"))
    return re if im == 0 else Cyclotomic.gaussian(re, im)


def to_json(p: AlgebraElement) -> dict:
    return {"d": p.d, "terms": [_term_json(k, c) for k, c in p.sorted_terms()]}


def from_json(data: dict) -> AlgebraElement:
    d = int(data["d"])
    terms = {}
    for t in data["terms"]:
        key = (tuple(int(ch) for ch in t["mu"]), tuple(int(ch) for ch in t["nu"]))
        terms[key] = terms.get(key, 0) + _coeff_from_json(t)
    return AlgebraElement(d, terms)
