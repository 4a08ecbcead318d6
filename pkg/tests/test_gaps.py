from fractions import Fraction

import numpy as np
import pytest

from circlaw.gaps import (Gap, GeneratorExpression, express_generators,
                          gap_closeness, gap_enumerate, gap_pigeonhole_bound,
                          rational_rank, rational_solve)
from circlaw.rng import trial_rng
from circlaw.smallball import SmallBallQuery, rho_iid


def test_rank_one_progression():
    gap = Gap.symmetric([1], [3])
    enum = gap_enumerate(gap)
    assert sorted(p[0] for p in enum.distinct) == list(range(-3, 4))
    assert enum.proper and enum.size == 7 == gap.volume


def test_rank_two_collision_not_proper():
    gap = Gap.symmetric([1, 2], [1, 1])
    enum = gap_enumerate(gap)
    assert gap.volume == 9
    assert enum.size == 7           # k1 + 2 k2 in [-3, 3]
    assert not enum.proper


def test_symmetric_flag():
    assert Gap.symmetric([1, 2], [1, 1]).is_symmetric
    assert not Gap.build([1], [0], [2]).is_symmetric
    assert not Gap.build([1], [-1], [1], base=[5]).is_symmetric


def test_volume_and_dilation_counting():
    gap = Gap.symmetric([(1, 0), (0, 1)], [2, 2])
    enum = gap_enumerate(gap)
    n = 5
    dilated = gap_enumerate(gap.dilate(n))
    assert dilated.size <= n ** gap.rank * enum.size
    assert gap.dilate(n).volume == 21 ** 2


def test_enumeration_cap():
    with pytest.raises(ValueError):
        gap_enumerate(Gap.symmetric([1, 2, 3], [100, 100, 100]))


def test_closeness_exact_membership():
    gap = Gap.symmetric([Fraction(1, 2)], [4])
    v = [Fraction(-1), Fraction(3, 2), Fraction(2)]
    rep = gap_closeness(v, gap, 0)
    assert rep.all_close and rep.close_count == 3


def test_closeness_perturbed_within_half_spacing():
    gap = Gap.symmetric([1], [3])
    delta = Fraction(1, 3)
    v = [k + delta / 2 for k in (-2, 0, 1, 3)]
    rep = gap_closeness(v, gap, delta)
    assert rep.all_close
    for (q, d2, ok), k in zip(rep.nearest, (-2, 0, 1, 3)):
        assert ok and q == (Fraction(k),)


def test_closeness_single_point_gap():
    gap = Gap.build([0], [0], [0], base=[Fraction(5, 2)])
    rep = gap_closeness([Fraction(5, 2), Fraction(3)], gap, Fraction(1, 2))
    assert rep.close_count == 2
    rep2 = gap_closeness([Fraction(4)], gap, Fraction(1, 2))
    assert rep2.close_count == 0


def test_pigeonhole_trivial_zero_gap():
    gap = Gap.symmetric([0], [0])
    v = [0, 0, 0, 0]
    rep = gap_pigeonhole_bound(v, gap, 0, s=0)
    assert rep.bound == 1 and rep.rho == 1 and rep.verified


def test_pigeonhole_rank_one_integers():
    gap = Gap.symmetric([1], [2])
    rng = trial_rng(50, 0)
    v = [int(rng.integers(-2, 3)) for _ in range(8)]
    rep = gap_pigeonhole_bound(v, gap, 0, s=0)
    assert rep.dilate_size == 33      # 8-fold dilate of [-2,2] around 1
    assert rep.bound == Fraction(1, 33)
    assert rep.verified and rep.rho >= rep.bound


def test_pigeonhole_rank_two_planar():
    gap = Gap.symmetric([(1, 0), (Fraction(1, 2), 1)], [1, 1])
    rng = trial_rng(50, 1)
    pts = list(gap_enumerate(gap).distinct)
    v = [pts[int(rng.integers(len(pts)))] for _ in range(10)]
    rep = gap_pigeonhole_bound(v, gap, 0, s=0)
    assert rep.verified and rep.rho >= rep.bound


def test_pigeonhole_requires_assignment():
    gap = Gap.symmetric([1], [1])
    with pytest.raises(ValueError):
        gap_pigeonhole_bound([10], gap, 0, s=0)
    with pytest.raises(ValueError):
        gap_pigeonhole_bound([0], Gap.build([1], [0], [1]), 0, s=0)


def test_express_identity_coefficients():
    gap = Gap.symmetric([(1, 0), (0, 1)], [3, 3])
    expr = express_generators(gap, [[1, 0], [0, 1]])
    assert expr.kind == "generators"
    assert expr.coefficients == ((Fraction(1), Fraction(0)),
                                 (Fraction(0), Fraction(1)))
    assert expr.residual_zero


def test_express_two_by_two_inverse():
    gap = Gap.symmetric([Fraction(2), Fraction(3)], [5, 5])
    expr = express_generators(gap, [[1, 1], [1, -1]])
    assert expr.kind == "generators"
    assert expr.coefficients == ((Fraction(1, 2), Fraction(1, 2)),
                                 (Fraction(1, 2), Fraction(-1, 2)))
    assert expr.residual_zero


def test_express_random_full_rank_exact():
    rng = trial_rng(50, 2)
    done = 0
    while done < 10:
        K = [[int(rng.integers(-5, 6)) for _ in range(3)] for _ in range(3)]
        if rational_rank([[Fraction(x) for x in row] for row in K]) < 3:
            continue
        gap = Gap.symmetric([(Fraction(int(rng.integers(-4, 5)), 3),
                              Fraction(int(rng.integers(-4, 5)), 2))
                             for _ in range(3)], [6, 6, 6])
        expr = express_generators(gap, K)
        assert expr.kind == "generators" and expr.residual_zero
        done += 1


def test_express_dependency_route():
    gap = Gap.symmetric([Fraction(1), Fraction(2), Fraction(5)], [4, 4, 4])
    K = [[1, 0, 2], [0, 1, -1], [1, 1, 1]]
    K[2] = [a + b for a, b in zip(K[0], K[1])]   # dependent third vector
    expr = express_generators(gap, K)
    assert expr.kind == "dependency"
    assert expr.coefficients == ((Fraction(1), Fraction(1)),)
    assert expr.residual_zero


def test_rational_solve_roundtrip():
    a = [[Fraction(2), Fraction(1)], [Fraction(1), Fraction(3)]]
    eye = [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1)]]
    inv = rational_solve(a, eye)
    prod = [[sum(a[i][k] * inv[k][j] for k in range(2)) for j in range(2)]
            for i in range(2)]
    assert prod == eye
    singular = [[Fraction(1), Fraction(2)], [Fraction(2), Fraction(4)]]
    assert rational_solve(singular, eye) is None
