"""Acceptance criteria 1-11, one test each; every test prints a single PASS/FAIL line.

Random inputs come from a seeded generator so every run checks the same cases.
"""

import math
import time
from fractions import Fraction
from itertools import combinations, product

import numpy as np
import pytest

from ifs_oalg.algebra import AlgebraElement, left_multiply, path_matrix, product_depth, verify_cuntz
from ifs_oalg.branch import (PartitionOfUnity, branched_points, branched_values, check_cograph_separation)
from ifs_oalg.codemap import code_point
from ifs_oalg.exact import Cyclotomic
from ifs_oalg.exel import verify_left_inverse, verify_redundancy, verify_toeplitz, verify_transfer_identity
from ifs_oalg.functions import SampledFunction
from ifs_oalg.ifs import attractor, attractor_run, self_similarity_residual
from ifs_oalg.pimsner import (CographFunction, refinement_gap, verify_cograph_generators, verify_condition_i,
                              verify_condition_ii, verify_condition_iii, verify_gauge)
from ifs_oalg.systems import SIERP_VERTICES, builtin

F = Fraction


@pytest.fixture
def verdict(capsys):
    def emit(k: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\nacceptance {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail
    return emit


def rational(rng, lo=-2, hi=2, den=9) -> Fraction:
    q = int(rng.integers(1, den + 1))
    return F(int(rng.integers(lo * q, hi * q + 1)), q)


def random_poly(rng, degree=3) -> SampledFunction:
    return SampledFunction.polynomial([rational(rng) for _ in range(int(rng.integers(1, degree + 2)))])


def random_cograph(rng, sys) -> CographFunction:
    """Independent components on disjoint cographs, sums of a(x) b(y) otherwise."""
    if check_cograph_separation(sys, attractor(sys, 1e-3), 1e-6)[0]:
        return CographFunction([random_poly(rng) for _ in range(sys.d)])
    xi = CographFunction.product(random_poly(rng), random_poly(rng), sys)
    return xi + CographFunction.product(random_poly(rng), random_poly(rng), sys)


def random_element(rng, d, max_len, max_terms=8) -> AlgebraElement:
    terms = {}
    for _ in range(int(rng.integers(0, max_terms + 1))):
        mu = tuple(int(v) for v in rng.integers(1, d + 1, int(rng.integers(0, max_len + 1))))
        nu = tuple(int(v) for v in rng.integers(1, d + 1, int(rng.integers(0, max_len + 1))))
        c = rational(rng)
        terms[(mu, nu)] = Cyclotomic.gaussian(c, rational(rng)) if rng.random() < 0.3 else c
    return AlgebraElement(d, terms)


def test_criterion_01_cuntz(verdict):
    t = time.perf_counter()
    reports = [verify_cuntz(d) for d in (1, 2, 3, 4)]
    dt = time.perf_counter() - t
    ok = all(r["status"] == "exact" and not r["sum_residual"] for r in reports) and dt < 1
    verdict(1, ok, f"Cuntz relations exact for d=1..4 in {dt:.3f}s (limit 1s)")


def test_criterion_02_attractor(verdict):
    sys, eps = builtin("CANTOR3"), 3.0**-10
    t = time.perf_counter()
    cloud = attractor(sys, eps)
    residual = self_similarity_residual(sys, cloud)
    dt = time.perf_counter() - t
    # oracle: left and right endpoints of the 2^10 level-10 intervals, enumerated directly
    left = np.array([sum(2 * b * 3.0 ** -(k + 1) for k, b in enumerate(bits)) for bits in product((0, 1), repeat=10)])
    ends = np.sort(np.concatenate([left, left + eps]))
    idx = np.clip(np.searchsorted(ends, cloud.points[:, 0]), 1, len(ends) - 1)
    gap = np.minimum(np.abs(cloud.points[:, 0] - ends[idx - 1]), np.abs(cloud.points[:, 0] - ends[idx]))
    ok = residual <= 2 * eps and gap.max() <= eps and dt < 10
    verdict(2, ok, f"residual {residual:.3g} <= {2 * eps:.3g}, max endpoint gap {gap.max():.3g} <= {eps:.3g}, "
                   f"{dt:.2f}s (limit 10s)")


def test_criterion_03_code_map(verdict):
    sys = builtin("CANTOR3")
    exact = code_point(sys, (1,) + (2,) * 9, (F(1),))[0] - F(1, 3)
    rng = np.random.default_rng(3)
    bad = 0
    for _ in range(1000):
        w = tuple(int(v) for v in rng.integers(1, 3, int(rng.integers(0, 16))))
        i = int(rng.integers(1, 3))
        x = (rational(rng, 0, 1, 50),)
        bad += code_point(sys, (i,) + w, x) != sys[i](code_point(sys, w, x))
    verdict(3, exact == 0 and bad == 0, f"code_point - 1/3 = {exact}; conjugacy failures {bad}/1000")


def test_criterion_04_branch(verdict):
    tent = builtin("TENTINV")
    cloud = attractor(tent, 1e-4)
    # closed form: y/2 = 1 - y/2
    y = F(1)
    C = branched_values(tent, cloud, 1e-5).points
    B = branched_points(tent, cloud, 1e-5).points
    tent_ok = (cloud.resolution <= 1e-4 and len(C) == 1 and len(B) == 1
               and abs(C[0, 0] - float(y)) <= 1e-6 and abs(B[0, 0] - float(y / 2)) <= 1e-6)
    c3, sp = builtin("CANTOR3"), builtin("SIERP")
    k3, ksp = attractor(c3, 1e-4), attractor(sp, 1e-2)
    sep3, gap3 = check_cograph_separation(c3, k3, 1e-6)
    sepsp, gapsp = check_cograph_separation(sp, ksp, 1e-6)
    want_sp = min(math.dist(p, q) for p, q in combinations([[float(v) for v in p] for p in SIERP_VERTICES], 2)) / 2
    rest_ok = (len(branched_points(c3, k3, 1e-6)) == 0 and len(branched_points(sp, ksp, 1e-6)) == 0
               and sep3 and sepsp and abs(gap3 - 2 / 3) <= 0.01 * 2 / 3 and abs(gapsp - want_sp) <= 0.01 * want_sp)
    verdict(4, tent_ok and rest_ok,
            f"TENTINV C={C.ravel().tolist()} B={B.ravel().tolist()}; gaps CANTOR3 {gap3:.6f} (2/3), "
            f"SIERP {gapsp:.6f} ({want_sp:.6f})")


def test_criterion_05_covariance(verdict):
    rng = np.random.default_rng(5)
    names = ["CANTOR3", "HALVES", "TENTINV"]
    systems = {n: builtin(n) for n in names}
    t = time.perf_counter()
    failures = []
    for trial in range(100):
        name = names[trial % 3]
        sys = systems[name]
        depth = 1 + trial % 5
        a, b = random_poly(rng), random_poly(rng)
        xi, eta = random_cograph(rng, sys), random_cograph(rng, sys)
        r1 = verify_condition_i(a, xi, b, sys, depth)["residual"]
        r2 = verify_condition_ii(xi, eta, sys, depth)["residual"]
        if r1 != "exact_zero" or r2 != "exact_zero":
            failures.append((name, depth, r1, r2))
    dt = time.perf_counter() - t
    verdict(5, not failures and dt < 60,
            f"conditions (i), (ii) exact zero on 100 random inputs, failures {len(failures)}, {dt:.2f}s (limit 60s)")


def test_criterion_06_condition_iii(verdict):
    c3, tent = builtin("CANTOR3"), builtin("TENTINV")
    k3, kt = attractor(c3, 1e-4), attractor(tent, 1e-4)
    r_c3 = verify_condition_iii(SampledFunction.constant(1), c3, k3, 3)["residual"]
    hat = SampledFunction.hat((F(3, 20),), F(3, 20))
    r_tent = verify_condition_iii(hat, tent, kt, 5)["residual"]
    oversized = PartitionOfUnity(np.array([[0.15]]), np.array([2.0]))
    r_bad = verify_condition_iii(hat, tent, kt, 5, partition=oversized)["residual"]
    verdict(6, r_c3 <= 1e-10 and r_tent <= 1e-10 and r_bad > 1e-3,
            f"CANTOR3 {r_c3:.3g}, TENTINV hat {r_tent:.3g} (<= 1e-10); negative control {r_bad:.3g} (> 1e-3)")


def test_criterion_07_gauge(verdict):
    rng = np.random.default_rng(7)
    zs = {"i": Cyclotomic.gaussian(0, 1), "cube root": Cyclotomic.root_of_unity(F(1, 3))}
    bad = 0
    runs = 0
    for name in ("CANTOR3", "HALVES", "TENTINV"):
        sys = builtin(name)
        for z in zs.values():
            for _ in range(10):
                rep = verify_gauge(random_poly(rng), random_cograph(rng, sys), sys, int(rng.integers(0, 5)), z)
                bad += rep["status"] != "exact"
                runs += 1
    verdict(7, bad == 0, f"gauge identities exact for z in {{i, cube root}} on {runs} random inputs, failures {bad}")


def test_criterion_08_cograph(verdict):
    reps = {n: verify_cograph_generators(builtin(n), attractor(builtin(n), 1e-4 if n == "HALVES" else 1e-2))
            for n in ("HALVES", "SIERP")}
    ok = all(r["status"] == "exact" and "d^(1/2)" in r["normalization_note"] for r in reps.values())
    verdict(8, ok, "generator relations " + ", ".join(f"{n} {r['status']}" for n, r in reps.items())
            + "; normalization note present")


def test_criterion_09_exel(verdict):
    tent = builtin("TENTINV")
    gamma = tent.left_inverse
    cloud = attractor(tent, 1e-4)
    li = verify_left_inverse(tent, gamma, cloud, 1e-14)["residual"]
    rng = np.random.default_rng(9)
    worst = max(verify_transfer_identity(random_poly(rng), random_poly(rng), tent, gamma, cloud, 1e-12)["residual"]
                for _ in range(100))
    toeplitz = [verify_toeplitz(random_poly(rng), tent, gamma, n)["status"] for n in (1, 2, 3, 4)]
    hat = SampledFunction.hat((F(3, 20),), F(3, 20))
    red = max(verify_redundancy(hat, b, tent, gamma, cloud, 1e-8)["residual"]
              for b in (SampledFunction.coordinate(0), SampledFunction.constant(1), random_poly(rng)))
    ok = li <= 1e-14 and worst <= 1e-12 and all(s == "exact" for s in toeplitz) and red <= 1e-8
    verdict(9, ok, f"left inverse {li:.3g}, transfer identity {worst:.3g} over 100 pairs, "
                   f"Toeplitz depths 1-4 {set(toeplitz)}, redundancy {red:.3g}")


def test_criterion_10_refinement(verdict):
    sys = builtin("CANTOR3")
    x, one = SampledFunction.coordinate(0), SampledFunction.constant(1)
    xi = CographFunction.product(x, one, sys) + CographFunction.product(one, x * x, sys)
    gaps = [refinement_gap(xi, sys, n) for n in range(3, 9)]
    ratios = [g1 / g0 for g0, g1 in zip(gaps, gaps[1:])]
    c = 1 / 3
    ok = all(c - 0.1 <= r <= c + 0.1 for r in ratios)
    verdict(10, ok, "successive ratios " + ", ".join(f"{r:.4f}" for r in ratios) + f" within [{c - 0.1:.3f}, "
                    f"{c + 0.1:.3f}]")


def test_criterion_11_oracle(verdict):
    rng = np.random.default_rng(11)
    bad = 0
    for k in range(500):
        d = 2 + k % 2
        max_len = 4 if d == 2 else 3
        p, q = random_element(rng, d, max_len), random_element(rng, d, max_len)
        n = product_depth(p, q)
        bad += path_matrix(p * q, n, exact=True) != left_multiply(p, path_matrix(q, n, exact=True))
    verdict(11, bad == 0, f"multiply matches path-matrix products on 500 random pairs, mismatches {bad}")
