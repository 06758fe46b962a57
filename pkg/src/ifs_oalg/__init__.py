"""Affine iterated function systems and the operator algebras built from them.

The package approximates attractors, computes branch sets and separation
properties on samples, and realises the covariant representation of the
cograph correspondence and the Exel crossed-product relations inside the
finite word algebra of the Cuntz algebra, where they can be checked with
exact rational (or cyclotomic) coefficients.
"""

from .algebra import (AlgebraElement, PathMatrix, RootScaled, adjoint, gauge, generator, multiply,
                      normal_form, path_matrix, refine, shift_element, truncation_norm, verify_cuntz)
from .branch import (BranchReport, PartitionOfUnity, branch_report, branched_points, branched_values,
                     build_partition, check_cograph_separation, check_strong_separation, index_set,
                     separating_radius)
from .codemap import code_error_bound, code_point, coded_points, lift, parse_word, shift, words
from .errors import *  # noqa: F401,F403
from .exact import Cyclotomic
from .functions import SampledFunction
from .ifs import (AffineContraction, IFSystem, PointCloud, attractor, attractor_run, hausdorff_distance,
                  hutchinson_step, is_hyperbolic, self_similarity_residual)
from .piecewise import Piece, PiecewiseAffineMap
from .pimsner import CographFunction, iota, module_action, module_inner, module_norm, psi
from .systems import BUILTINS, builtin, load_system

__version__ = "0.1.0"
