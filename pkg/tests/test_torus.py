from fractions import Fraction

import pytest

from apfree.rng import SplitMix64
from apfree.torus import (HALF_OFFSET_CANDIDATES, LiftVec, TorusVec,
                          affine_orbit, first_coord, frac_bracket,
                          half_difference, lift, offset_candidates, pair_sum,
                          parse_rational, realized_offsets)

F = Fraction


def tv(*coords, q=60):
    return TorusVec.from_fractions([F(c) for c in coords], q)


def test_lift_is_canonical_representative():
    t = tv("3/10", "9/10")
    assert lift(t).coords == (F(3, 10), F(9, 10))
    assert lift(tv(0, 0)).coords == (F(0), F(0))
    # reduction mod 1 happens at construction
    assert TorusVec.from_fractions([F(13, 10) % 1, F(1, 2)], 10).coords == \
        (F(3, 10), F(1, 2))


def test_torusvec_rejects_bad_input():
    with pytest.raises(ValueError):
        TorusVec((0, 1, 2), 10)  # odd coordinate count
    with pytest.raises(ValueError):
        TorusVec((10, 0), 10)  # numerator out of range
    with pytest.raises(ValueError):
        TorusVec.from_fractions([F(1, 3), F(0)], 10)  # not on the grid


def test_frac_bracket_values():
    assert frac_bracket(F(3, 10)) == F(3, 10)
    assert frac_bracket(F(7, 10)) == F(1, 5)
    assert frac_bracket(F(0)) == F(0)
    with pytest.raises(ValueError):
        frac_bracket(F(1))
    with pytest.raises(ValueError):
        frac_bracket(F(-1, 10))


def test_frac_bracket_kills_half_shift(rnd):
    for _ in range(300):
        x = F(rnd.randrange(1000), 1000)
        assert frac_bracket(x) == frac_bracket((x + F(1, 2)) % 1)


def test_frac_bracket_vec_is_coordinatewise():
    from apfree.torus import frac_bracket_vec

    v = LiftVec((F(3, 10), F(7, 10), F(0), F(9, 10)))
    assert frac_bracket_vec(v).coords == (F(3, 10), F(1, 5), F(0), F(2, 5))


def test_pair_sum_and_first_coord():
    assert pair_sum(tv("3/10", "9/10")) == (F(6, 5),)
    assert pair_sum(tv(0, 0)) == (F(0),)
    assert pair_sum(tv("1/10", "2/10", "1/2", "1/2")) == (F(3, 10), F(1))
    assert first_coord(tv("3/10", "9/10")) == (F(3, 10),)
    assert first_coord(tv(0, "1/2")) == (F(0),)
    assert first_coord(tv("1/10", "2/10", "6/10", "1/2")) == (F(1, 10), F(3, 5))


def test_affine_orbit_examples():
    mu = tv(0, 0, q=4)
    step = tv("1/4", "1/4", q=4)
    assert affine_orbit(mu, step, 3).coords == (F(3, 4), F(3, 4))
    assert affine_orbit(mu, step, 0) == mu
    mu = tv("1/2", 0, q=6)
    step = tv("1/3", 0, q=6)
    assert affine_orbit(mu, step, 2).coords == (F(1, 6), F(0))


def test_affine_orbit_is_additive(rnd):
    q = 997
    for _ in range(50):
        mu = TorusVec(tuple(rnd.randrange(q) for _ in range(4)), q)
        st = TorusVec(tuple(rnd.randrange(q) for _ in range(4)), q)
        m, n = rnd.randrange(500), rnd.randrange(500)
        assert affine_orbit(affine_orbit(mu, st, m), st, n) == \
            affine_orbit(mu, st, m + n)


def test_half_difference_examples():
    assert half_difference(tv("9/10", 0), tv("1/10", 0)).coords == \
        (F(-2, 5), F(0))
    t = tv("2/10", "3/10")
    assert half_difference(t, t).coords == (F(0), F(0))
    assert half_difference(tv("2/10", "3/10"), tv("6/10", "1/10")).coords == \
        (F(1, 5), F(-1, 10))


def test_half_difference_reconstructs_endpoint(rnd):
    q = 601
    for _ in range(100):
        x = TorusVec(tuple(rnd.randrange(q) for _ in range(6)), q)
        z = TorusVec(tuple(rnd.randrange(q) for _ in range(6)), q)
        d = half_difference(x, z)
        for xc, dc, zc in zip(lift(x).coords, d.coords, lift(z).coords):
            assert xc + 2 * dc == zc
            assert F(-1, 2) <= dc <= F(1, 2)


def test_offset_candidates_are_the_conservative_four():
    assert offset_candidates() == HALF_OFFSET_CANDIDATES
    assert len(HALF_OFFSET_CANDIDATES) == 4
    assert set(HALF_OFFSET_CANDIDATES) == {F(-1), F(-1, 2), F(0), F(1, 2)}


def test_offsets_exhaustive_small_grid():
    # Oracle: enumerate every x and alpha on a /32 grid; the realized offset
    # (z lift minus x lift)/2 - alpha lift must land in the candidate set.
    q = 32
    realized = set()
    for xn in range(q):
        for an in range(q):
            x = TorusVec((xn, 0), q)
            a = TorusVec((an, 0), q)
            off = realized_offsets(x, a)[0]
            assert off in HALF_OFFSET_CANDIDATES
            realized.add(off)
    # the +1/2 slot is deliberate slack: never realized
    assert realized == {F(-1), F(-1, 2), F(0)}


def test_offsets_on_random_3aps(rnd):
    q = (1 << 61) - 1
    stream = SplitMix64(42)
    for _ in range(500):
        theta = TorusVec.random(stream, q, 2)
        alpha = TorusVec.random(stream, q, 2)
        for off in realized_offsets(theta, alpha):
            assert off in HALF_OFFSET_CANDIDATES


def test_spec_offset_worked_example():
    # alpha = 3/10 on the first coordinate, x1 = 9/10: the z lift is 1/2,
    # the half-difference -1/5, and the offset -1/2.
    q = 10
    x = TorusVec((9, 0), q)
    a = TorusVec((3, 0), q)
    z = affine_orbit(x, a, 2)
    assert lift(z).coords[0] == F(1, 2)
    d = half_difference(x, z)
    assert d.coords[0] == F(-1, 5)
    assert (d.coords[0] - F(3, 10)) == F(-1, 2)


def test_roundtrip_lift_project(rnd):
    q = 1009
    for _ in range(50):
        t = TorusVec(tuple(rnd.randrange(q) for _ in range(4)), q)
        assert TorusVec.from_fractions(lift(t).coords, q) == t


def test_parse_rational():
    assert parse_rational("3/4") == F(3, 4)
    assert parse_rational(" 7 ") == F(7)
    assert parse_rational("-1/2") == F(-1, 2)
    with pytest.raises(ValueError):
        parse_rational("0.5")
    with pytest.raises(ValueError):
        parse_rational("1/0")


def test_liftvec_validation():
    with pytest.raises(ValueError):
        LiftVec(())
    with pytest.raises(ValueError):
        LiftVec((F(1, 2),))
