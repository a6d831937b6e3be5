"""Tower scalar arithmetic: representation round trips, ordering, and
the exp/log inverse pair."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hairlab.towers import (E, EQ, GT, LT, MANTISSA_TOL, ONE, ZERO,
                            BoundPair, log_to_float, to_float, tower_add,
                            tower_add_log, tower_cmp, tower_exp,
                            tower_from_json, tower_from_real, tower_le,
                            tower_log, tower_lt, tower_max, tower_scale,
                            tower_from_real as T, tower_to_json)


def test_constants():
    assert to_float(ZERO) == 0.0
    assert to_float(ONE) == 1.0
    assert tower_cmp(ZERO, ONE) == LT


def test_round_trip_exact_values():
    for x in (0.0, 1.0, -1.0, 0.5, math.e, 1e300, -1e300, 1e-300, 7.25):
        assert to_float(T(x)) == pytest.approx(x, rel=1e-12, abs=1e-312)


def test_round_trip_random_bulk():
    rng = np.random.default_rng(11)
    xs = rng.uniform(-1e6, 1e6, 10_000)
    for x in xs:
        assert to_float(T(x)) == pytest.approx(x, rel=1e-12)


def test_json_round_trip():
    for t in (ZERO, ONE, T(-42.5), tower_exp(tower_exp(T(3.0)))):
        back = tower_from_json(tower_to_json(t))
        assert tower_cmp(t, back) == EQ
        assert back.height == t.height and back.sign == t.sign


def test_cmp_orders_random_pairs():
    rng = np.random.default_rng(12)
    xs = rng.uniform(-1e8, 1e8, (5000, 2))
    for a, b in xs:
        want = GT if a > b else LT
        assert tower_cmp(T(a), T(b)) == want


def test_cmp_huge_heights():
    a = tower_exp(tower_exp(T(100.0)))     # e^(e^100)
    b = tower_exp(tower_exp(T(100.0 + 1e-6)))
    c = tower_exp(T(1e300))
    assert tower_cmp(a, b) == LT
    assert tower_cmp(b, c) == LT           # height wins
    assert tower_cmp(a, a) == EQ


def test_cmp_equal_within_mantissa_tol():
    a = tower_exp(tower_exp(T(5.0)))
    b = tower_scale(a, 1.0 + 1e-13)        # far below mantissa resolution
    assert tower_cmp(a, b) == EQ


def test_exp_log_inverse_bulk():
    rng = np.random.default_rng(13)
    for x in rng.uniform(-50.0, 700.0, 2000):
        t = T(x)
        back = tower_log(tower_exp(t))
        assert tower_cmp(back, t) == EQ
    # and high towers
    for x in rng.uniform(1.0, 100.0, 100):
        t = tower_exp(tower_exp(T(x)))
        assert tower_cmp(tower_log(tower_exp(t)), t) == EQ


def test_log_requires_positive():
    with pytest.raises(ValueError):
        tower_log(T(-2.0))


def test_add_log_matches_floats():
    for r, c in ((5.0, math.log(0.2)), (10.0, 1.5), (700.0, -1.0)):
        got = tower_add_log(tower_exp(T(r)), c)
        assert log_to_float(got) == pytest.approx(
            r + math.log1p(c * math.exp(-r)), rel=1e-12)


def test_add_log_beyond_float_range_absorbs_with_flag():
    big = tower_exp(tower_exp(T(50.0)))    # log far beyond doubles
    got = tower_add_log(big, 3.0)
    assert tower_cmp(got, big) == EQ
    assert got.absorbed
    assert got.absorption_bound > 0.0


def test_add_exact_at_float_scale():
    got = tower_add(T(3.0), T(4.5))
    assert to_float(got) == pytest.approx(7.5, rel=1e-12)
    got = tower_add(T(1e308), T(1e308))    # float overflow, log1p path
    assert log_to_float(got) == pytest.approx(
        math.log(2.0) + 308.0 * math.log(10.0), rel=1e-12)


def test_add_absorbs_tiny_term():
    big = tower_exp(tower_exp(T(40.0)))
    got = tower_add(big, T(5.0))
    assert tower_cmp(got, big) == EQ
    assert got.absorbed


def test_scale_monotone():
    t = tower_exp(T(30.0))
    assert tower_cmp(tower_scale(t, 2.0), t) == GT
    assert tower_cmp(tower_scale(t, 0.5), t) == LT
    with pytest.raises(ValueError):
        tower_scale(t, -1.0)  # positive factors only


def test_le_lt_max_consistent():
    a, b = T(2.0), T(3.0)
    assert tower_lt(a, b) and tower_le(a, b) and tower_le(a, a)
    assert not tower_lt(a, a)
    assert tower_cmp(tower_max(a, b), b) == EQ


def test_bound_pair_rejects_inverted():
    with pytest.raises(ValueError):
        BoundPair(T(2.0), T(1.0))
    bp = BoundPair(T(1.0), T(2.0))
    wide = bp.widened(0.5)
    assert tower_le(wide.lo, bp.lo) and tower_le(bp.hi, wide.hi)


@given(st.floats(min_value=-600.0, max_value=600.0,
                 allow_nan=False, allow_infinity=False))
@settings(max_examples=200, deadline=None)
def test_exp_then_log_identity(x):
    if abs(x) < 1e-6:   # exp(x) rounds to 1.0 below float resolution
        x = 1e-6
    t = T(x)
    assert tower_cmp(tower_log(tower_exp(t)), t) == EQ


@given(st.floats(min_value=-1e15, max_value=1e15, allow_nan=False),
       st.floats(min_value=-1e15, max_value=1e15, allow_nan=False))
@settings(max_examples=200, deadline=None)
def test_cmp_agrees_with_floats(a, b):
    got = tower_cmp(T(a), T(b))
    if abs(a - b) > 1e-6:
        assert got == (GT if a > b else LT)
    else:
        # near-ties may round to EQ under the mantissa tolerance
        assert got in (EQ, GT if a >= b else LT)


@given(st.floats(min_value=1.0, max_value=500.0, allow_nan=False))
@settings(max_examples=100, deadline=None)
def test_exp_strictly_monotone(x):
    assert tower_cmp(tower_exp(T(x + 1.0)), tower_exp(T(x))) == GT
