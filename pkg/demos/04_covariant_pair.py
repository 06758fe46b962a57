"""Functions on K and on the cographs, represented in the word algebra."""

from fractions import Fraction

import numpy as np

from ifs_oalg import attractor, builtin
from ifs_oalg.branch import PartitionOfUnity
from ifs_oalg.functions import SampledFunction
from ifs_oalg.pimsner import (CographFunction, iota, psi, refinement_gap, verify_cograph_generators,
                              verify_condition_i, verify_condition_ii, verify_condition_iii, verify_gauge)

cantor = builtin("CANTOR3")
x = SampledFunction.coordinate(0)
one = SampledFunction.constant(1)

# iota(a) is diagonal with entries a(x_w); psi(xi) shifts by one letter.
print("iota(x, 1) =", iota(x, cantor, 1))
print("psi(1, 0)  =", psi(CographFunction.constant(1, 2), cantor, 0))

# The first two covariance conditions hold termwise, so the residual is the zero element.
a = SampledFunction.polynomial([Fraction(1, 2), Fraction(1)])
b = SampledFunction.polynomial([Fraction(1), Fraction(0), Fraction(-1, 3)])
xi = CographFunction.product(a, b, cantor) + CographFunction.product(one, a, cantor)
for n in (1, 3, 5):
    r1 = verify_condition_i(a, xi, b, cantor, n)["residual"]
    r2 = verify_condition_ii(xi, xi, cantor, n)["residual"]
    g = verify_gauge(a, xi, cantor, n, Fraction(1, 3))["status"]
    print(f"depth {n}: condition (i) {r1}, condition (ii) {r2}, gauge by a cube root {g}")

# The third goes through a partition of unity and is checked in floating point.
tent = builtin("TENTINV")
cloud = attractor(tent, 1e-4)
bump = SampledFunction.hat((Fraction(3, 20),), Fraction(3, 20))
good = verify_condition_iii(bump, tent, cloud, 5)
bad = verify_condition_iii(bump, tent, cloud, 5, partition=PartitionOfUnity(np.array([[0.15]]), np.array([2.0])))
print(f"\ncondition (iii) on TENTINV: {good['residual']:.2e} with {good['partition_size']} balls; "
      f"{bad['residual']:.3f} with one oversized ball")

# Deeper truncations converge at the contraction rate.
gaps = [refinement_gap(xi, cantor, n) for n in range(3, 9)]
print("refinement gaps:", [f"{g:.2e}" for g in gaps])
print("ratios:", [round(g1 / g0, 4) for g0, g1 in zip(gaps, gaps[1:])])

# When the cographs are disjoint, the indicator functions give back Cuntz generators.
halves = builtin("HALVES")
rep = verify_cograph_generators(halves, attractor(halves, 1e-4))
print("\nHALVES cograph generators:", rep["status"])
print("note:", rep["normalization_note"])
