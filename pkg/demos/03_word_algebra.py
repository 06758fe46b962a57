"""The Cuntz relations in exact arithmetic, and a matrix picture to check products against."""

from fractions import Fraction

from ifs_oalg import AlgebraElement, gauge, generator, shift_element, verify_cuntz
from ifs_oalg.algebra import left_multiply, path_matrix, product_depth, refine, truncation_norm
from ifs_oalg.exact import Cyclotomic

d = 3
s = [generator(d, i) for i in range(1, d + 1)]
print("s1* s1 =", s[0].star * s[0])
print("s1* s2 =", s[0].star * s[1])
total = s[0] * s[0].star + s[1] * s[1].star + s[2] * s[2].star
print("sum s_i s_i* equals 1:", total.equivalent(AlgebraElement.identity(d)))
print("verify_cuntz:", [verify_cuntz(k)["status"] for k in (1, 2, 3, 4)])

# S = s_1 + ... + s_d is not an isometry: S* S = d.
S = shift_element(d)
print("\nS* S =", S.star * S)

# Products by the word rule agree with products of path matrices.
p = AlgebraElement(2, {((1, 2), (2,)): Fraction(1, 3), ((), (1,)): Fraction(2)})
q = AlgebraElement(2, {((2,), (1, 1)): Fraction(-1), ((1,), ()): Cyclotomic.gaussian(0, 1)})
n = product_depth(p, q)
print("\np q =", p * q)
print("path matrices agree:", path_matrix(p * q, n, exact=True) == left_multiply(p, path_matrix(q, n, exact=True)))
print("norm of p on level", n, "=", round(truncation_norm(p, n), 6))

# Refinement rewrites S_mu S_nu* = sum_i S_(mu i) S_(nu i)* without changing the element.
print("\nrefine(s_1, 2) =", refine(generator(2, 1), 2))

# The gauge action multiplies S_mu S_nu* by z^(|mu| - |nu|); z below is a primitive cube root.
z = Cyclotomic.root_of_unity(Fraction(1, 3))
print("gauge(S, z) == z S:", gauge(shift_element(2), z) == z * shift_element(2))
