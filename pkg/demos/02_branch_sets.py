"""Where do the maps of a system collide?  Branch sets, separation and neighbourhoods."""

import numpy as np

from ifs_oalg import attractor, builtin
from ifs_oalg.branch import branch_report, build_partition, separating_radius
from ifs_oalg.errors import OnBranchSet
from ifs_oalg.ifs import PointCloud

# TENTINV = {x/2, 1 - x/2}: the two maps agree at y = 1 with common image 1/2.
# CANTOR3 and SIERP have no coincidences at all; HALVES has touching images but
# disjoint cographs.
for name in ("TENTINV", "CANTOR3", "HALVES", "SIERP"):
    sys = builtin(name)
    rep = branch_report(sys, attractor(sys, 1e-4 if sys.dimension == 1 else 1e-2), 1e-6)
    print(f"{name:8s} C={rep.branched_values.points.ravel().round(8).tolist()} "
          f"B={rep.branched_points.points.ravel().round(8).tolist()}  "
          f"strong={rep.strong_separation} (gap {rep.strong_gap:.3f})  "
          f"cograph={rep.cograph_separation} (gap {rep.cograph_gap:.3f})")

tent = builtin("TENTINV")
cloud = attractor(tent, 1e-4)

# Away from B every point has a ball on which the maps can be told apart.
for x in (0.1, 0.25, 0.45):
    print(f"separating radius at {x}: {separating_radius(tent, [x], cloud, 1e-6):.5f}")
try:
    separating_radius(tent, [0.5], cloud, 1e-6)
except OnBranchSet as exc:
    print("at 0.5:", exc)

# Cover the part of K inside [0, 0.3] by such balls and glue hats into a partition of unity.
support = PointCloud(cloud.points[cloud.points[:, 0] <= 0.3])
part = build_partition(tent, support, cloud, 1e-6)
total = part.evaluate(cloud.points).sum(axis=1) + part.residual(cloud.points)
print(f"\n{len(part)} balls, centres {np.round(part.centers.ravel(), 4).tolist()}")
print("max |sum phi_k - 1| over K:", float(np.abs(total - 1).max()))
print("balls failing the neighbourhood conditions:", part.certify(tent, cloud, 1e-6))
