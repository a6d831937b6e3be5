"""Structural huge scalars: exact margin survival at tower magnitudes."""

import math

import pytest

from hairlab import bignum as bn
from hairlab.towers import EQ, GT, LT, to_float, tower_cmp, tower_exp, \
    tower_from_real


def test_float_passthrough():
    assert bn.b_add(2.0, 3.0) == 5.0
    assert bn.b_sub_float(7.0, 4.5) == 2.5
    assert bn.b_cmp(1.0, 2.0) == -1
    assert bn.b_scale(3.0, 2.0) == 6.0
    assert bn.b_log(math.e) == pytest.approx(1.0)


def test_overflow_promotes_to_exp():
    x = bn.b_add(1e308, 1e308)
    assert bn.is_exp(x)
    assert bn._float_of(x) is None or bn._float_of(x) == math.inf
    t = bn.to_tower(x)
    assert tower_cmp(t, tower_from_real(1e308)) == GT


def test_shared_structure_cancels_exactly():
    # two quantities at magnitude e^(e^300) differing by an offset of 1
    core = bn.Exp(bn.Exp(300.0, 0.0), 0.0)
    a = bn.b_add_small(core, 5.0)
    b = bn.b_add_small(core, 6.0)
    assert bn.b_sub_float(b, a) == 1.0
    assert bn.b_cmp(b, a) == 1
    assert bn.b_cmp(a, a) == 0
    # towers cannot resolve this margin
    assert tower_cmp(bn.to_tower(a), bn.to_tower(b)) == EQ


def test_log_offset_correction_exact_in_float_range():
    x = bn.Exp(10.0, 5.0)          # e^10 + 5
    got = bn.b_log(x)
    assert got == pytest.approx(math.log(math.exp(10.0) + 5.0), rel=1e-15)


def test_log_of_pure_exp_returns_log():
    inner = bn.Exp(300.0, 7.0)
    x = bn.Exp(inner, 0.0)
    assert bn.b_log(x) is inner


def test_scale_matches_values():
    x = bn.Exp(5.0, 2.0)           # e^5 + 2
    y = bn.b_scale(x, 3.0)
    assert bn._float_of(y) == pytest.approx(3.0 * (math.exp(5.0) + 2.0),
                                            rel=1e-12)


def test_add_merges_comparable_scales():
    x, y = bn.Exp(800.0, 0.0), bn.Exp(799.0, 0.0)
    s = bn.b_sum(x, y)
    # ln(e^800 + e^799) = 800 + log1p(e^-1)
    assert s.log == pytest.approx(800.0 + math.log1p(math.exp(-1.0)))


def test_add_folds_float_representable_term():
    big = bn.Exp(bn.Exp(300.0, 0.0), 0.0)
    mid = bn.Exp(500.0, 0.0)       # e^500 fits a double
    s = bn.b_add(big, mid)
    assert bn.b_sub_float(s, big) == pytest.approx(math.exp(500.0))


def test_add_absorbs_and_flags_unrepresentable_term():
    big = bn.Exp(bn.Exp(300.0, 0.0), 0.0)
    small = bn.Exp(1000.0, 0.0)    # beyond doubles, tiny next to big
    s = bn.b_add(big, small)
    assert bn.was_absorbed(s)
    assert bn.b_sub_float(s, big) == 0.0


def test_cmp_across_representations():
    assert bn.b_cmp(bn.Exp(800.0, 0.0), 1e300) == 1
    assert bn.b_cmp(1e300, bn.Exp(800.0, 0.0)) == -1
    assert bn.b_cmp(bn.Exp(bn.Exp(400.0, 0.0), 0.0),
                    bn.Exp(900.0, 0.0)) == 1


def test_json_round_trip_bitwise():
    x = bn.Exp(bn.Exp(300.25, 1.5), bn.Exp(12.0, -3.0))
    back = bn.big_from_json(bn.big_to_json(x))
    assert back == x
    assert bn.b_sub_float(x, back) == 0.0


def test_to_tower_heights():
    x = bn.Exp(bn.Exp(300.0, 0.0), 0.0)
    t = bn.to_tower(x)
    assert t.height >= 2
    small = bn.Exp(2.0, 1.0)
    assert to_float(bn.to_tower(small)) == pytest.approx(math.exp(2.0) + 1.0)
