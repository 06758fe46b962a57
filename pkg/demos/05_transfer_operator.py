"""A left inverse gamma, the endomorphism a -> a o gamma and its transfer operator."""

from fractions import Fraction

from ifs_oalg import attractor, builtin
from ifs_oalg.errors import NotLeftInverse
from ifs_oalg.exel import (alpha, transfer, verify_left_inverse, verify_redundancy, verify_toeplitz,
                           verify_transfer_identity)
from ifs_oalg.functions import SampledFunction
from ifs_oalg.piecewise import PiecewiseAffineMap

tent = builtin("TENTINV")
gamma = tent.left_inverse          # the tent map undoes both x/2 and 1 - x/2
cloud = attractor(tent, 1e-4)
print("left inverse residual:", verify_left_inverse(tent, gamma, cloud, 1e-14)["residual"])

wrong = PiecewiseAffineMap([{"lower": [0], "upper": [1], "matrix": [[2]], "offset": [0]}])
try:
    verify_left_inverse(tent, wrong, cloud, 1e-8)
except NotLeftInverse as exc:
    print("gamma(x) = 2x:", exc)

x = SampledFunction.coordinate(0)
print("\nalpha(x)(3/4) =", alpha(x, gamma)((Fraction(3, 4),)))
print("L(x)(1/3)     =", transfer(x, tent)((Fraction(1, 3),)))

a = SampledFunction.polynomial([Fraction(1, 3), Fraction(-2), Fraction(5, 7)])
b = SampledFunction.polynomial([Fraction(2), Fraction(1, 9)])
print("L(alpha(a) b) - a L(b):", verify_transfer_identity(a, b, tent, gamma, cloud, 1e-12)["residual"])

for n in (1, 2, 3, 4):
    rep = verify_toeplitz(a, tent, gamma, n)
    print(f"Toeplitz relations at depth {n}: {rep['relation_i']}, {rep['relation_ii']}")

bump = SampledFunction.hat((Fraction(3, 20),), Fraction(3, 20))
rep = verify_redundancy(bump, x, tent, gamma, cloud, 1e-8)
print(f"\nredundancy identity on supp(a): {rep['residual']:.2e} "
      f"(without the factor d: {rep['unscaled_residual']:.3f})")
