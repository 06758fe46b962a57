"""Exact scalars: rationals, and elements of cyclotomic fields Q(zeta_m).

Coefficients of algebra elements are kept as :class:`fractions.Fraction`
whenever they are real, and promoted to :class:`Cyclotomic` only when a
complex value is required (Gaussian rationals live in Q(zeta_4), gauge
actions by a root of order q lift to Q(zeta_lcm(4, q))).  Floats and
Python complex numbers are accepted everywhere and make results inexact.
"""

from __future__ import annotations

import math
import numbers
from fractions import Fraction
from functools import lru_cache

import sympy


@lru_cache(maxsize=None)
def _cyclotomic_coeffs(m: int) -> tuple[int, ...]:
    x = sympy.Symbol("x")
    poly = sympy.Poly(sympy.cyclotomic_poly(m, x), x)
    return tuple(int(c) for c in reversed(poly.all_coeffs()))


def _reduce(coeffs: list, m: int) -> tuple[Fraction, ...]:
    """Reduce a polynomial in zeta_m (low degree first) modulo Phi_m."""
    phi = _cyclotomic_coeffs(m)
    deg = len(phi) - 1
    c = list(coeffs)
    for k in range(len(c) - 1, deg - 1, -1):
        lead = c[k]
        if lead:
            shift = k - deg
            for j, pj in enumerate(phi):
                if pj:
                    c[shift + j] -= lead * pj
    c = c[:deg] + [0] * (deg - len(c))
    return tuple(Fraction(v) for v in c)


class Cyclotomic:
    """An element sum_j c_j zeta_m^j of Q(zeta_m), zeta_m = exp(2 pi i / m)."""

    __slots__ = ("order", "coeffs")
    __hash__ = None

    def __init__(self, order: int, coeffs):
        self.order = int(order)
        self.coeffs = _reduce(list(coeffs), self.order)

    @classmethod
    def gaussian(cls, re, im=0) -> "Cyclotomic":
        return cls(4, (Fraction(re), Fraction(im)))

    @classmethod
    def root_of_unity(cls, turns) -> "Cyclotomic":
        """exp(2 pi i * turns) for a rational number of turns."""
        t = Fraction(turns)
        m = t.denominator
        k = t.numerator % m
        c = [0] * m
        c[k] = 1
        return cls(m, c)

    def lift(self, m: int) -> "Cyclotomic":
        if m == self.order:
            return self
        if m % self.order:
            raise ValueError(f"Q(zeta_{self.order}) does not embed in Q(zeta_{m})")
        step = m // self.order
        c = [0] * m
        for j, v in enumerate(self.coeffs):
            c[(j * step) % m] += v
        return Cyclotomic(m, c)

    def _common(self, other):
        if isinstance(other, Cyclotomic):
            m = math.lcm(self.order, other.order)
            return self.lift(m), other.lift(m)
        if isinstance(other, (int, Fraction)):
            return self, Cyclotomic(1, (other,)).lift(self.order)
        return None, None

    def __add__(self, other):
        a, b = self._common(other)
        if a is None:
            if isinstance(other, numbers.Complex):
                return complex(self) + other
            return NotImplemented
        return Cyclotomic(a.order, [x + y for x, y in zip(a.coeffs, b.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return Cyclotomic(self.order, [-x for x in self.coeffs])

    def __sub__(self, other):
        if isinstance(other, numbers.Complex) and not isinstance(other, (int, Fraction)):
            return complex(self) - other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._common(other)
        if a is None:
            if isinstance(other, numbers.Complex):
                return complex(self) * other
            return NotImplemented
        n = len(a.coeffs)
        prod = [Fraction(0)] * (2 * n)
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in enumerate(b.coeffs):
                    if y:
                        prod[i + j] += x * y
        return Cyclotomic(a.order, prod)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return Cyclotomic(self.order, [x / other for x in self.coeffs])
        if isinstance(other, Cyclotomic):
            return self * other.inverse()
        if isinstance(other, numbers.Complex):
            return complex(self) / other
        return NotImplemented

    def __rtruediv__(self, other):
        return self.inverse() * other

    def inverse(self) -> "Cyclotomic":
        # product of all Galois conjugates other than self is rational times adj
        if not self:
            raise ZeroDivisionError("inverse of zero")
        m = self.order
        others = [k for k in range(2, m) if math.gcd(k, m) == 1]
        adj = Cyclotomic(m, (1,))
        for k in others:
            adj = adj * self.galois(k)
        norm = self * adj
        return adj / norm.coeffs[0]

    def galois(self, k: int) -> "Cyclotomic":
        m = self.order
        c = [0] * m
        for j, v in enumerate(self.coeffs):
            c[(j * k) % m] += v
        return Cyclotomic(m, c)

    def conjugate(self) -> "Cyclotomic":
        return self.galois(-1 % self.order) if self.order > 1 else self

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = Cyclotomic(self.order, (1,))
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __bool__(self):
        return any(self.coeffs)

    def __eq__(self, other):
        a, b = self._common(other)
        if a is None:
            if isinstance(other, numbers.Complex):
                return complex(self) == other
            return NotImplemented
        return a.coeffs == b.coeffs

    def __complex__(self):
        m = self.order
        return sum(
            (complex(math.cos(2 * math.pi * j / m), math.sin(2 * math.pi * j / m)) * float(v)
             for j, v in enumerate(self.coeffs) if v),
            0j,
        )

    def rational_parts(self):
        """(re, im) as Fractions when the value lies in Q(i), else ``None``."""
        big = self.lift(math.lcm(self.order, 4))
        m = big.order
        for k in range(1, m):
            if k % 4 == 1 and math.gcd(k, m) == 1 and big.galois(k) != big:
                return None
        i = Cyclotomic(4, (0, 1))
        re = (big + big.conjugate()) / 2
        im = (big - big.conjugate()) / (2 * i)
        return re.coeffs[0], im.coeffs[0]

    def __repr__(self):
        parts = self.rational_parts()
        if parts is not None:
            re, im = parts
            return f"Cyclotomic.gaussian({re}, {im})"
        return f"Cyclotomic({self.order}, {list(map(str, self.coeffs))})"


def conj(c):
    """Complex conjugate of any supported scalar."""
    if isinstance(c, (int, Fraction)):
        return c
    return c.conjugate()


def is_exact(c) -> bool:
    return isinstance(c, (int, Fraction, Cyclotomic))


def to_fraction(value) -> Fraction:
    """Parse a JSON scalar (int, float or "p/q" string) as an exact rational.

    Floats are read through their shortest decimal representation so that
    0.1 becomes 1/10 rather than its binary expansion.
    """
    if isinstance(value, bool):
        raise TypeError("boolean is not a number")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite number {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot read {value!r} as a rational")


def format_rational(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def solve_exact(matrix, rhs) -> tuple[Fraction, ...]:
    """Solve ``matrix @ x = rhs`` over the rationals."""
    m = sympy.Matrix(matrix)
    sol = m.LUsolve(sympy.Matrix(rhs))
    return tuple(Fraction(int(v.p), int(v.q)) for v in sol)


def inverse_exact(matrix) -> tuple[tuple[Fraction, ...], ...]:
    inv = sympy.Matrix(matrix).inv()
    return tuple(
        tuple(Fraction(int(inv[i, j].p), int(inv[i, j].q)) for j in range(inv.cols))
        for i in range(inv.rows)
    )
