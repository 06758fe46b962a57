"""Attractors of four small systems, and the code map that labels their points by words."""

from fractions import Fraction

from ifs_oalg import attractor_run, builtin, code_error_bound, code_point, self_similarity_residual
from ifs_oalg.ifs import diameter_bound

# Hutchinson iteration from the fixed point of the first map.  The reported
# resolution is a certified bound on the Hausdorff distance to the attractor.
for name, eps in [("CANTOR3", 1e-4), ("HALVES", 1e-4), ("TENTINV", 1e-4), ("SIERP", 1e-2)]:
    sys = builtin(name)
    run = attractor_run(sys, eps)
    res = self_similarity_residual(sys, run.cloud)
    print(f"{name:8s} c={sys.ratio:.3f}  {len(run.cloud):6d} points after {run.iterations:2d} steps, "
          f"resolution {run.cloud.resolution:.2e}, residual {res:.2e}")

# A finite word w picks out x_w = gamma_w1(...gamma_wn(x*)...).  Coordinates are exact.
cantor = builtin("CANTOR3")
w = (1,) + (2,) * 9
x = code_point(cantor, w)[0]
print("\nx_w for w = 1222222222:", x, "=", float(x))
# Any infinite extension of w lands within c^n diam(K) of it; 1/3 = F(1 2 2 2 ...) is one of them.
diam = diameter_bound(attractor_run(cantor, 1e-4).cloud)
print("distance to 1/3:", float(Fraction(1, 3) - x), "<= bound", code_error_bound(cantor, len(w), diam))
# Starting from 1 instead of the canonical base point gives 1/3 on the nose.
print("same word from x = 1:", code_point(cantor, w, (Fraction(1),))[0])

# Conjugacy: prepending a letter is the same as applying that map.
tent = builtin("TENTINV")
v = (2, 1, 1, 2)
print("\nx_(1v) == gamma_1(x_v):", code_point(tent, (1,) + v) == tent[1](code_point(tent, v)))
