from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ifs_oalg.algebra import AlgebraElement
from ifs_oalg.branch import PartitionOfUnity
from ifs_oalg.errors import NotLeftInverse, OnBranchSet
from ifs_oalg.exact import Cyclotomic
from ifs_oalg.exel import (alpha, check_transfer_properties, s_hat, transfer, verify_exel_gauge, verify_left_inverse,
                           verify_redundancy, verify_toeplitz, verify_transfer_identity)
from ifs_oalg.functions import SampledFunction
from ifs_oalg.piecewise import PiecewiseAffineMap

F = Fraction
X = SampledFunction.coordinate(0)
ONE = SampledFunction.constant(1)
HAT = SampledFunction.hat((F(3, 20),), F(3, 20))

polys = st.lists(st.fractions(-2, 2, max_denominator=9), min_size=1, max_size=4).map(SampledFunction.polynomial)


def tent(x: np.ndarray) -> np.ndarray:
    """Closed-form tent map, the oracle for the piecewise left inverse."""
    return np.where(x <= 0.5, 2 * x, 2 - 2 * x)


def test_left_inverse_examples(systems, clouds):
    rep = verify_left_inverse(systems["TENTINV"], systems["TENTINV"].left_inverse, clouds["TENTINV"], 1e-14)
    assert rep["residual"] <= 1e-14 and rep["continuous"]
    halves = systems["HALVES"]
    rep = verify_left_inverse(halves, halves.left_inverse, clouds["HALVES"], 1e-14)
    assert rep["residual"] == 0 and rep["warning"]
    c3 = systems["CANTOR3"]
    assert verify_left_inverse(c3, c3.left_inverse, clouds["CANTOR3"], 1e-14)["status"] == "pass"


def test_wrong_left_inverse(systems, clouds):
    doubling = PiecewiseAffineMap([{"lower": [0], "upper": [1], "matrix": [[2]], "offset": [0]}])
    with pytest.raises(NotLeftInverse) as err:
        verify_left_inverse(systems["TENTINV"], doubling, clouds["TENTINV"], 1e-8)
    report = err.value.report
    assert report["worst"]["map"] == 2
    # the largest miss is at y near 0: gamma(gamma_2(0)) = gamma(1) = 2
    assert report["residual"] == pytest.approx(2.0, abs=1e-3)
    assert abs(report["worst"]["point"][0]) <= 1e-3


def test_tent_piecewise_matches_closed_form(systems):
    x = np.linspace(0, 1, 1001)
    assert np.allclose(systems["TENTINV"].left_inverse.apply(x[:, None])[:, 0], tent(x), atol=1e-15)


def test_alpha_examples(systems, clouds):
    gamma, pts = systems["TENTINV"].left_inverse, clouds["TENTINV"].points
    assert np.all(alpha(ONE, gamma).values(pts) == 1)
    assert np.allclose(alpha(X, gamma).values(pts), tent(pts[:, 0]))
    assert alpha(X, gamma)((F(3, 4),)) == F(1, 2)


@given(polys, polys)
def test_alpha_is_multiplicative(a, b):
    from ifs_oalg.systems import builtin
    gamma = builtin("TENTINV").left_inverse
    pts = np.linspace(0, 1, 33)[:, None]
    assert np.allclose(alpha(a * b, gamma).values(pts), alpha(a, gamma).values(pts) * alpha(b, gamma).values(pts))


def test_transfer_examples(systems):
    for sys in systems.values():
        assert transfer(ONE, sys)(sys.base_point) == 1
    tent_sys = systems["TENTINV"]
    for y in (F(0), F(1, 3), F(1)):
        assert transfer(X, tent_sys)((y,)) == F(1, 2)
    c3 = systems["CANTOR3"]
    for y in (F(0), F(2, 9), F(1)):
        assert transfer(X, c3)((y,)) == y / 3 + F(1, 3)


def test_transfer_identity_examples(systems, clouds):
    for name in ("TENTINV", "HALVES", "CANTOR3"):
        sys = systems[name]
        rep = verify_transfer_identity(X, ONE, sys, sys.left_inverse, clouds[name], 1e-12)
        assert rep["status"] == "pass"
        rep = verify_transfer_identity(ONE, X, sys, sys.left_inverse, clouds[name], 1e-12)
        assert rep["residual"] <= 1e-15


@settings(max_examples=30)
@given(polys, polys)
def test_transfer_identity_random(a, b):
    from ifs_oalg.ifs import attractor
    from ifs_oalg.systems import builtin
    sys = builtin("TENTINV")
    cloud = attractor(sys, 1e-3)
    assert verify_transfer_identity(a, b, sys, sys.left_inverse, cloud, 1e-12)["residual"] <= 1e-12
    # exact route: the identity holds in rational arithmetic at rational points
    gamma = sys.left_inverse
    for y in (F(1, 7), F(2, 5), F(9, 10)):
        lhs = transfer(alpha(a, gamma) * b, sys)((y,))
        assert lhs == a((y,)) * transfer(b, sys)((y,))


@pytest.mark.parametrize("name", ["TENTINV", "HALVES", "CANTOR3"])
@pytest.mark.parametrize("depth", [1, 2, 3, 4])
def test_toeplitz_exact(systems, name, depth):
    sys = systems[name]
    rep = verify_toeplitz(X, sys, sys.left_inverse, depth)
    assert rep["relation_i"] == rep["relation_ii"] == "exact_zero"


def test_toeplitz_constant_reduces_to_isometry(systems):
    sys = systems["TENTINV"]
    assert verify_toeplitz(ONE, sys, sys.left_inverse, 2)["status"] == "exact"
    S = s_hat(2)
    assert (S.star * S - AlgebraElement.identity(2)).is_zero()


@settings(max_examples=15)
@given(polys, st.integers(1, 4))
def test_toeplitz_random(a, depth):
    from ifs_oalg.systems import builtin
    sys = builtin("TENTINV")
    assert verify_toeplitz(a, sys, sys.left_inverse, depth)["status"] == "exact"


def test_toeplitz_detects_a_bad_left_inverse(systems):
    # negative control: the identity in place of gamma breaks relation (i)
    ident = PiecewiseAffineMap([{"lower": [0], "upper": [1], "matrix": [[1]], "offset": [0]}])
    rep = verify_toeplitz(X, systems["TENTINV"], ident, 2)
    assert rep["relation_i"] != "exact_zero" and rep["relation_ii"] == "exact_zero"


@pytest.mark.parametrize("z", [F(1, 4), F(1, 3), Cyclotomic.root_of_unity(F(1, 6))])
def test_exel_gauge(systems, z):
    assert verify_exel_gauge(X, systems["TENTINV"], 3, z)["status"] == "exact"


def test_redundancy_examples(systems, clouds):
    sys, cloud = systems["TENTINV"], clouds["TENTINV"]
    for b in (X, ONE):
        rep = verify_redundancy(HAT, b, sys, sys.left_inverse, cloud, 1e-8)
        assert rep["status"] == "pass" and rep["residual"] <= 1e-8
        assert rep["offenders"] == []
    # the literal form misses by the factor d
    rep = verify_redundancy(HAT, ONE, sys, sys.left_inverse, cloud, 1e-8)
    assert rep["unscaled_residual"] == pytest.approx(0.5, abs=1e-8)


def test_redundancy_negative_control(systems, clouds):
    sys, cloud = systems["TENTINV"], clouds["TENTINV"]
    bad = PartitionOfUnity(np.array([[0.15]]), np.array([2.0]))
    rep = verify_redundancy(HAT, X, sys, sys.left_inverse, cloud, 1e-8, partition=bad)
    assert rep["status"] == "fail" and rep["offenders"]


def test_redundancy_rejects_branch_support(systems, clouds):
    sys = systems["TENTINV"]
    with pytest.raises(OnBranchSet):
        verify_redundancy(ONE, X, sys, sys.left_inverse, clouds["TENTINV"], 1e-8)


@settings(max_examples=20)
@given(polys)
def test_transfer_invariants(a):
    from ifs_oalg.ifs import attractor
    from ifs_oalg.systems import builtin
    for name in ("TENTINV", "CANTOR3", "HALVES"):
        sys = builtin(name)
        props = check_transfer_properties(a, sys, sys.left_inverse, attractor(sys, 1e-3), tol=1e-9)
        assert all(props.values()), props
