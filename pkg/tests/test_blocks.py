from fractions import Fraction

import pytest

from apfree.blocks import (BlockSpec, BlockVariant, in_block, in_block_pair,
                           in_T1, in_T2, in_U1, in_U2, measure_exact,
                           measure_monte_carlo)
from apfree.torus import TorusVec

F = Fraction
EPS = F(1, 16)


def shoelace(vertices) -> Fraction:
    area = F(0)
    for (x1, y1), (x2, y2) in zip(vertices, vertices[1:] + vertices[:1]):
        area += x1 * y2 - x2 * y1
    return abs(area) / 2


def u_variant_area_oracle(eps: Fraction) -> Fraction:
    """Exact polygon areas, independently of the closed-form formula."""
    tri1 = [(F(0), F(1, 2)), (F(0), F(3, 4)), (F(1, 4), F(1, 2))]
    tri2 = [(F(1, 2), F(0)), (F(3, 4), F(0)), (F(1, 2), F(1, 4))]
    band = [
        (F(0), F(3, 4) + eps),
        (F(0), F(1)),
        (F(1, 4), F(1)),
        (F(1, 2), F(3, 4)),
        (F(1, 2), F(1, 4) + eps),
    ]
    return shoelace(tri1) + shoelace(tri2) + shoelace(band)


def test_in_U1_examples():
    assert in_U1(F(6, 10), F(1, 10))
    assert not in_U1(F(3, 10), F(3, 10))
    assert not in_U1(F(7, 10), F(1, 10))  # sum 4/5 >= 3/4


def test_in_U2_examples():
    assert in_U2(F(4, 10), F(5, 10), EPS)
    assert not in_U2(F(4, 10), F(4, 10), EPS)  # 4/5 <= 3/4 + 1/16
    assert not in_U2(F(6, 10), F(3, 10), EPS)  # first coordinate >= 1/2


def test_boundary_conventions_are_half_open():
    # a+b exactly 3/4 is outside U1; exactly 3/4+eps is outside U2;
    # exactly 5/4 is outside U2.
    assert not in_U1(F(1, 4), F(1, 2))
    assert not in_U2(F(1, 4), F(9, 16), EPS)  # sum exactly 13/16
    assert not in_U2(F(1, 4), F(1), EPS)  # coords must be < 1
    assert not in_U2(F(3, 8), F(7, 8), EPS)  # sum exactly 5/4
    assert in_U2(F(3, 8), F(7, 8) - F(1, 1000), EPS)


def test_in_block_examples():
    spec = BlockSpec(BlockVariant.U_TRUNCATION, EPS)
    good = TorusVec.from_fractions(
        [F(6, 10), F(1, 10), F(4, 10), F(5, 10)], 80)
    bad = TorusVec.from_fractions(
        [F(6, 10), F(1, 10), F(4, 10), F(4, 10)], 80)
    origin = TorusVec.from_fractions([F(0), F(0)], 80)
    assert in_block(good, spec)
    assert not in_block(bad, spec)
    assert not in_block(origin, spec)


def test_U1_U2_disjoint_exhaustive():
    g = 64
    for na in range(g):
        for nb in range(g):
            a, b = F(na, g), F(nb, g)
            assert not (in_U1(a, b) and in_U2(a, b, EPS))


def test_measure_exact_values():
    assert measure_exact(BlockSpec(BlockVariant.U_TRUNCATION, EPS)) == F(1, 4)
    for eps in (F(1, 16), F(1, 8), F(1, 100), F(3, 16), F(1, 5)):
        spec = BlockSpec(BlockVariant.U_TRUNCATION, eps)
        assert measure_exact(spec) == F(9, 32) - eps / 2
        assert measure_exact(spec) >= F(9, 32) - eps  # stated lower bound
        assert measure_exact(spec) == u_variant_area_oracle(eps)
    tiny = BlockSpec(BlockVariant.U_TRUNCATION, F(1, 10**6))
    assert measure_exact(tiny) == F(9, 32) - F(1, 2 * 10**6)


def test_epsilon_validation():
    with pytest.raises(ValueError):
        BlockSpec(BlockVariant.U_TRUNCATION, F(1, 4))
    with pytest.raises(ValueError):
        BlockSpec(BlockVariant.U_TRUNCATION, F(0))
    with pytest.raises(ValueError):
        BlockSpec(BlockVariant.U_TRUNCATION, F(3, 10))


def test_monte_carlo_agrees_with_exact():
    spec = BlockSpec(BlockVariant.U_TRUNCATION, EPS)
    est = measure_monte_carlo(spec, samples=200_000, seed=5)
    assert abs(est - measure_exact(spec)) < F(3, 1000)


def test_monte_carlo_t_variant_exceeds_lower_bound():
    spec = BlockSpec(BlockVariant.T_EPS, EPS)
    est = measure_monte_carlo(spec, samples=200_000, seed=5)
    assert est >= measure_exact(spec) - F(3, 1000)


def test_pair_sum_sup_on_grid():
    # sup of a+b over U1 is 3/4 (not attained); over the whole block 5/4.
    g = 512
    best_u1 = F(0)
    best_u = F(0)
    for na in range(g):
        for nb in range(g):
            a, b = F(na, g), F(nb, g)
            s = a + b
            if in_U1(a, b):
                best_u1 = max(best_u1, s)
                assert s < F(3, 4)
            if in_U1(a, b) or in_U2(a, b, EPS):
                best_u = max(best_u, s)
                assert s < F(5, 4)
    assert best_u1 > F(3, 4) - F(2, g)
    assert best_u > F(5, 4) - F(2, g)


def test_cross_region_pair_sum_gap(rnd):
    # any U1 point vs any U2 point differ in pair sum by more than eps
    g = 256
    u1_pts = [(F(a, g), F(b, g)) for a in range(g) for b in range(g)
              if in_U1(F(a, g), F(b, g))]
    u2_pts = [(F(a, g), F(b, g)) for a in range(g) for b in range(g)
              if in_U2(F(a, g), F(b, g), EPS)]
    for _ in range(2000):
        xa, xb = rnd.choice(u1_pts)
        za, zb = rnd.choice(u2_pts)
        assert (za + zb) - (xa + xb) > EPS


def test_t_variant_membership():
    spec = BlockSpec(BlockVariant.T_EPS, EPS)
    # (0.6, 0.1): inside T2 (7/12 <= 0.7 < 5/6, 2a+b = 1.3 < 3/2) but the
    # pair sum 0.7 is not in the removed band [5/6-1/16, 5/6).
    assert in_T2(F(6, 10), F(1, 10))
    assert in_block_pair(F(6, 10), F(1, 10), spec)
    # (0.4, 0.41): T1 lower square piece needs sum > 5/6
    assert not in_T1(F(4, 10), F(41, 100))
    # (0.3, 0.55): T1 band piece (7/12 <= 0.85 <= 4/3)
    assert in_T1(F(3, 10), F(55, 100))
    # a point whose pair sum falls in the removed band [5/6-eps, 5/6)
    a, b = F(2, 10), F(6, 10)  # sum 0.8 in [0.77083.., 0.8333..)
    assert in_T1(a, b)
    assert not in_block_pair(a, b, spec)
    # T-variant exact-measure claim is only the lower bound
    assert measure_exact(spec) == F(7, 24) - 2 * EPS
