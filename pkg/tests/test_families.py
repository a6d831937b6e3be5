"""Family evaluation, max-modulus growth, semiconjugacy residuals, and
the parameter criteria."""

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hairlab import families as fam
from hairlab.towers import GT, log_to_float, to_float, tower_cmp, \
    tower_from_real


def test_constructors_validate():
    with pytest.raises(ValueError):
        fam.fatou_map(-1.0)          # needs Re lam > 0
    with pytest.raises(ValueError):
        fam.affine_exp(1, 2.0)       # needs m >= 2
    with pytest.raises(ValueError):
        fam.star_map(1.0, 0)
    with pytest.raises(ValueError):
        fam.FunctionFamily("exp", complex(0.2), m=3)
    with pytest.raises(ValueError):
        fam.FunctionFamily("cosh", complex(0.2))


def test_evaluate_matches_formulas():
    z = complex(1.3, -0.7)
    assert fam.evaluate(fam.exp_family(0.2), z) == 0.2 * cmath.exp(z)
    assert fam.evaluate(fam.fatou_map(1.5), z) == z + 1.5 + cmath.exp(-z)
    assert fam.evaluate(fam.affine_exp(3, 2.0), z) == \
        3 * z + 2.0 + cmath.exp(-z)
    g = fam.star_map(1.0, 2)
    assert fam.evaluate(g, z) == pytest.approx(
        cmath.exp(-1.0) * z * z * cmath.exp(-z), rel=1e-14)


def test_evaluate_overflow_raises():
    with pytest.raises(fam.NeedsLogLift):
        fam.evaluate(fam.exp_family(0.2), complex(1000.0))
    with pytest.raises(fam.NeedsLogLift):
        fam.evaluate(fam.fatou_map(1.0), complex(-1000.0))


def test_max_modulus_exp_closed_form():
    # M(r, lam e^z) = |lam| e^r, attained at z = r
    for r in (1.0, 5.0, 50.0, 700.0, 1e6):
        m = fam.max_modulus(fam.exp_family(0.2), r)
        assert log_to_float(m) == pytest.approx(r + math.log(0.2),
                                                rel=1e-12)


def test_max_modulus_star_closed_form():
    # |g| on |w| = r peaks at w = -r: e^(-Re lam) r^m e^r
    g = fam.star_map(1.5, 3)
    for r in (2.0, 10.0, 300.0):
        m = fam.max_modulus(g, r)
        assert log_to_float(m) == pytest.approx(
            r + 3 * math.log(r) - 1.5, rel=1e-12)


def _dense_circle_max(family, r, n=1_000_000):
    # brute-force oracle: dense sampling of log |f| on the circle
    theta = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    z = r * np.exp(1j * theta)
    if family.kind == "fatou":
        v = z + family.lam + np.exp(-z)
    elif family.kind == "affine":
        v = family.m * z + family.lam + np.exp(-z)
    else:
        raise AssertionError
    return float(np.max(np.log(np.abs(v))))


def test_max_modulus_fatou_vs_dense_sampling():
    f = fam.fatou_map(1.0)
    for r in (2.0, 7.5, 30.0):
        got = log_to_float(fam.max_modulus(f, r))
        want = _dense_circle_max(f, r)
        assert got == pytest.approx(want, rel=1e-9, abs=1e-9)
        assert got >= want - 1e-12    # sampled oracle can only undershoot


def test_max_modulus_affine_vs_dense_sampling():
    f = fam.affine_exp(3, 2.0)
    for r in (2.0, 12.0):
        got = log_to_float(fam.max_modulus(f, r))
        want = _dense_circle_max(f, r)
        assert got == pytest.approx(want, rel=1e-9, abs=1e-9)


def test_max_modulus_fatou_large_r_is_exponential():
    f = fam.fatou_map(1.0)
    m = fam.max_modulus(f, 900.0)
    assert log_to_float(m) == pytest.approx(900.0, rel=1e-12)


def test_iterated_max_modulus_monotone():
    ladder = fam.iterated_max_modulus(fam.exp_family(0.2), 5.0, 6)
    assert len(ladder) == 6
    for a, b in zip(ladder, ladder[1:]):
        assert tower_cmp(b, a) == GT
    # first rung in closed form
    assert log_to_float(ladder[0]) == pytest.approx(5.0 + math.log(0.2))
    # second rung: M(M(5)) with M(5) = 0.2 e^5 still a float
    m1 = 0.2 * math.exp(5.0)
    assert log_to_float(ladder[1]) == pytest.approx(m1 + math.log(0.2),
                                                    rel=1e-12)


def test_iterated_max_modulus_rejects_small_R():
    with pytest.raises(ValueError):
        fam.iterated_max_modulus(fam.exp_family(0.2), 0.5, 3)


def test_semiconjugacy_fatou_residual_tiny():
    f = fam.fatou_map(1.0)
    g = fam.star_map(1.0, 1)
    report = fam.check_semiconjugacy(f, g, samples=2000)
    assert report.max_residual < 1e-9


def test_semiconjugacy_affine_residual_tiny():
    for m in (2, 3, 5):
        f = fam.affine_exp(m, 2.5)
        g = fam.star_map(2.5, m)
        report = fam.check_semiconjugacy(f, g, samples=2000)
        assert report.max_residual < 1e-9


def test_semiconjugacy_mismatched_pair_rejected():
    with pytest.raises(ValueError):
        fam.check_semiconjugacy(fam.fatou_map(1.0), fam.star_map(1.0, 2))
    with pytest.raises(ValueError):
        fam.check_semiconjugacy(fam.affine_exp(2, 1.0),
                                fam.star_map(2.0, 2))


def test_semiconjugacy_pointwise_identity():
    # pi(f(z)) = g(pi(z)) with pi(z) = e^(-z), checked by hand at a point
    f = fam.affine_exp(2, 1.5)
    g = fam.star_map(1.5, 2)
    z = complex(0.4, 1.1)
    lhs = cmath.exp(-fam.evaluate(f, z))
    rhs = fam.evaluate(g, cmath.exp(-z))
    assert abs(lhs - rhs) < 1e-14 * max(1.0, abs(lhs))
    assert fam.semiconjugacy_residual(f, g, z) < 1e-14


@given(st.floats(min_value=-4.0, max_value=4.0),
       st.floats(min_value=-4.0, max_value=4.0))
@settings(max_examples=200, deadline=None)
def test_semiconjugacy_residual_property(re, im):
    f = fam.fatou_map(1.0)
    g = fam.star_map(1.0, 1)
    assert fam.semiconjugacy_residual(f, g, complex(re, im)) < 1e-10


def test_criterion_halfplane():
    assert fam.criterion_halfplane(4, 3.0)
    assert not fam.criterion_halfplane(4, 0.0)
    # boundary: threshold is 1 + m (ln m - 1)
    thr = 1.0 + 4.0 * (math.log(4.0) - 1.0)
    assert fam.criterion_halfplane(4, thr + 1e-9)
    assert not fam.criterion_halfplane(4, thr - 1e-9)


def test_criterion_halfline():
    assert fam.criterion_halfline(2, 1.0)
    thr = 1.0 * (math.log(1.0) - 1.0)   # m = 2 threshold is -1
    assert fam.criterion_halfline(2, thr + 0.5)
    assert not fam.criterion_halfline(3, -10.0)
    with pytest.raises(ValueError):
        fam.criterion_halfline(1, 5.0)


def test_star_critical_value():
    g = fam.star_map(2.0, 3)
    want = 27.0 * cmath.exp(-3.0 - 2.0)
    assert fam.star_critical_value(g) == pytest.approx(want, rel=1e-14)
    # g'(w) = 0 at w = m: confirm numerically by central difference
    h = 1e-6
    d = (fam.evaluate(g, complex(3.0 + h)) -
         fam.evaluate(g, complex(3.0 - h))) / (2.0 * h)
    assert abs(d) < 1e-6
    assert fam.evaluate(g, complex(3.0)) == pytest.approx(want, rel=1e-12)


def test_real_fixed_points():
    f = fam.exp_family(0.2)
    (q_a, mult_a), (q_r, mult_r) = fam.real_fixed_points(f)
    # lam e^q = q at both points, multiplier equals q
    for q in (q_a, q_r):
        assert 0.2 * math.exp(q) == pytest.approx(q, rel=1e-10)
    assert mult_a == q_a and mult_r == q_r
    assert mult_a < 1.0 < mult_r
    # repelling point for lam = 0.2, from an independent bisection
    assert q_r == pytest.approx(2.5426413577735265, abs=1e-9)


def test_real_fixed_points_requires_small_real_lam():
    with pytest.raises(ValueError):
        fam.real_fixed_points(fam.exp_family(0.5))   # above 1/e
    with pytest.raises(ValueError):
        fam.real_fixed_points(fam.fatou_map(1.0))


def test_basin_convergence_heuristic():
    g = fam.star_map(3.0, 4)         # half-plane criterion holds
    v = fam.star_critical_value(g)
    out = fam.basin_convergence_heuristic(g, v)
    assert out["converged"] and out["heuristic"]


@given(st.floats(min_value=1.0, max_value=500.0))
@settings(max_examples=100, deadline=None)
def test_max_modulus_monotone_in_r(r):
    f = fam.exp_family(0.2)
    a = fam.max_modulus(f, r)
    b = fam.max_modulus(f, r * 1.01)
    assert tower_cmp(b, a) == GT
