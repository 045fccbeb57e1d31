from fractions import Fraction

import pytest

from apfree.blocks import in_U1, in_U2
from apfree.checks import (bracket_law_violates, check_bracket_law,
                           check_one_sided_rounding, check_product_set,
                           check_quantitative, check_u1_midpoint,
                           one_sided_rounding_violates, product_set_eval,
                           quantitative_eval, replay_violation,
                           u1_midpoint_violates)
from apfree.torus import frac_bracket

F = Fraction
EPS = F(1, 16)


# -- exhaustive checks -------------------------------------------------------

def test_bracket_law_zero_violations():
    for g in (2, 16, 64):
        rep = check_bracket_law(g)
        assert rep.passed
        assert rep.trials == (g + 1) ** 2
        assert rep.stats["premise_fired"] > 0


def test_bracket_law_grid_validation():
    with pytest.raises(ValueError):
        check_bracket_law(3)
    with pytest.raises(ValueError):
        check_bracket_law(0)


def test_bracket_law_scalar_against_fractions():
    # replay predicate vs a direct Fraction evaluation of both sides
    g = 40

    def fold(v):  # extend the fold to the closed interval: {1} = 1/2
        return v if v < F(1, 2) else v - F(1, 2)

    for nx in range(g + 1):
        for nz in range(g + 1):
            x, z = F(nx, g), F(nz, g)
            y = (x + z) / 2
            lhs = (1 - fold(x)) ** 2 + (1 - fold(z)) ** 2 - 2 * (1 - fold(y)) ** 2
            premise = lhs < 2 * ((z - x) / 2) ** 2
            conclusion = min(x, z) < F(1, 2) <= y
            assert bracket_law_violates(nx, nz, g) == (premise and not conclusion)


def test_u1_midpoint_zero_violations():
    rep = check_u1_midpoint(16)
    assert rep.passed
    assert rep.stats["region_points"] > 0
    with pytest.raises(ValueError):
        check_u1_midpoint(6)


def test_u1_midpoint_scalar_cases():
    g = 64
    # x = z gives equality 0 >= 0
    pts = [(a, b) for a in range(g) for b in range(g)
           if in_U1(F(a, g), F(b, g))]
    xa, xb = pts[0]
    assert not u1_midpoint_violates(xa, xb, xa, xb, g)
    # the worked pair (0.1, 0.6) and (0.6, 0.1) scaled onto the /64 grid
    assert in_U1(F(6, 64), F(38, 64)) and in_U1(F(38, 64), F(6, 64))
    assert not u1_midpoint_violates(6, 38, 38, 6, g)


def test_one_sided_rounding_zero_violations():
    rep = check_one_sided_rounding(16, EPS)
    assert rep.passed
    rep = check_one_sided_rounding(32, F(1, 8))
    assert rep.passed


def test_one_sided_rounding_scalar_against_fractions():
    # direct Fraction mirror of the shifted-membership predicate
    g = 24
    shifts = [(F(1, 2), F(1, 2)), (F(1, 2), F(0)), (F(0), F(1, 2))]
    pts = [(a, b) for a in range(g) for b in range(g)
           if in_U1(F(a, g), F(b, g)) or in_U2(F(a, g), F(b, g), EPS)]
    for xa, xb in pts[::3]:
        for za, zb in pts[::5]:
            ystar = (F(xa + za, 2 * g), F(xb + zb, 2 * g))
            expected = False
            for s1, s2 in shifts:
                wa, wb = ystar[0] - s1, ystar[1] - s2
                if 0 <= wa < 1 and 0 <= wb < 1 and (
                        in_U1(wa, wb) or in_U2(wa, wb, EPS)):
                    expected = True
            got = one_sided_rounding_violates(xa, xb, za, zb, g,
                                              EPS.numerator, EPS.denominator)
            assert got == expected


# -- sampled checks ----------------------------------------------------------

def test_quantitative_zero_violations_and_coverage():
    rep = check_quantitative(EPS, trials=20000, seed=2)
    assert rep.passed
    assert rep.coverage_ok
    assert rep.stats["plus_half"] > 0.001 * rep.trials
    assert rep.stats["freiman_ok"] > 0.001 * rep.trials
    # the strong quadratic form never loses to the stated one
    assert rep.stats["f2_strong"] <= rep.stats["f2_stated"]
    assert rep.trials == 20000


def test_quantitative_deterministic_across_threads():
    a = check_quantitative(EPS, trials=10000, seed=3, threads=1)
    b = check_quantitative(EPS, trials=10000, seed=3, threads=4)
    assert a.stats == b.stats
    assert a.violations == b.violations


def test_product_set_zero_violations():
    for d0 in (1, 2, 3):
        rep = check_product_set(EPS, d0=d0, trials=4000, seed=4)
        assert rep.passed
        assert rep.coverage_ok
        off = rep.stats["offset_counts"]
        assert off["1/2"] == 0  # deliberate slack slot never realized
        assert off["-1"] > 0 and off["0"] > 0
        assert rep.stats["offset_escapes"] == 0


def test_product_reduces_to_quantitative_at_d0_1():
    # same sampler stream: the d0=1 triples of both checks coincide
    q = (1 << 61) - 1
    from apfree.checks import _sample_shards

    xs1, ys1, zs1, _ = next(_sample_shards(100, 1, q, 0, 1, 16, 7, 1))
    for x, y, z in zip(xs1.tolist(), ys1.tolist(), zs1.tolist()):
        rq = quantitative_eval(x, y, z, q, 1, 16)
        rp = product_set_eval(x, y, z, q, 1, F(10**10 * 256), False)
        assert not rq["violation"] and not rp["violation"]
        # the +1/2 branch is the same statement in both forms
        assert rq["plus_half"] == rp["plus_half"]


def test_degenerate_ap_passes():
    # alpha = 0: x = y = z, the identity branch holds with d = 0
    x = [3, 5]
    r = quantitative_eval(x, x, x, 16, 1, 16)
    assert r["freiman1"] and not r["violation"]
    rp = product_set_eval(x, x, x, 16, 1, F(100), False)
    assert rp["freiman1_all"] and not rp["violation"]
    assert set(rp["offsets"]) <= {-2, 0}  # offsets 0 or -1 per coordinate


def test_half_integer_common_difference():
    # alpha in the half-integer subgroup: d vanishes after offsetting, the
    # quadratic branch degenerates to >= 0
    q = 16
    x = [1, 9]  # (1/16, 9/16) in U1
    y = [9, 1]  # x + (1/2, 1/2)
    r = quantitative_eval(x, y, x, q, 1, 16)
    assert not r["violation"]


def test_replay_reproduces_evaluation_bit_for_bit():
    q = (1 << 61) - 1
    from apfree.checks import _sample_shards

    xs, ys, zs, _ = next(_sample_shards(200, 2, q, 0, 1, 16, 9, 1))
    params = {"epsilon": "1/16", "q": q, "d0": 2, "c2": "2560000000000",
              "w3_literal": False}
    for x, y, z in zip(xs.tolist(), ys.tolist(), zs.tolist()):
        record = {"x": x, "y": y, "z": z}
        r = product_set_eval(x, y, z, q, 2, F(2560000000000), False)
        assert replay_violation("product", record, params) == \
            (r["violation"] or r["offset_escape"])
    rec = {"x": "3/8", "z": "5/8"}
    assert replay_violation("bracket", rec, {"grid": 8}) == \
        bracket_law_violates(3, 5, 8)
    with pytest.raises(ValueError):
        replay_violation("nope", {}, {})


def test_reports_serialize(tmp_path):
    import json

    rep = check_bracket_law(8)
    doc = rep.to_dict()
    text = json.dumps(doc)
    back = json.loads(text)
    assert back["name"] == "bracket"
    assert back["passed"] is True
    assert back["violations"] == []


def test_fold_consistency_with_frac_bracket():
    # the integer fold used by the checks agrees with the torus fold
    from apfree.checks import _fold_over_2q

    q = 97
    for k in range(q):
        assert F(_fold_over_2q(k, q), 2 * q) == frac_bracket(F(k, q))


def test_cross_region_midpoints_stay_low():
    # one endpoint in the wedges, one in the band: the midpoint coordinate
    # sum stays below 1 (the sup computation behind the rounding lemma)
    g = 64
    u1 = [(a, b) for a in range(g) for b in range(g)
          if in_U1(F(a, g), F(b, g))]
    u2 = [(a, b) for a in range(g) for b in range(g)
          if in_U2(F(a, g), F(b, g), EPS)]
    for xa, xb in u1[::7]:
        for za, zb in u2[::11]:
            ystar_sum = F(xa + za + xb + zb, 2 * g)
            assert ystar_sum < 1


def test_cross_region_triples_take_plus_half_or_break_guard():
    # if the endpoints land in different regions, the pair-sum gap exceeds
    # eps, so either the +1/2 branch fires or the guard cannot hold
    q = (1 << 61) - 1
    from apfree.checks import _sample_shards

    seen = 0
    for xs, ys, zs, _ in _sample_shards(4000, 1, q, 0, 1, 16, 13, 1):
        for x, y, z in zip(xs.tolist(), ys.tolist(), zs.tolist()):
            in_u1_x = in_U1(F(x[0], q), F(x[1], q))
            in_u1_z = in_U1(F(z[0], q), F(z[1], q))
            if in_u1_x == in_u1_z:
                continue
            seen += 1
            r = quantitative_eval(x, y, z, q, 1, 16)
            assert not r["violation"]
            assert r["plus_half"] or not r["guard"]
    assert seen > 20
