"""Orbit iteration across representation hand-offs and bounded-horizon
escape classification."""

import cmath
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hairlab import families as fam
from hairlab import orbits
from hairlab.towers import (GT, log_to_float, to_float, tower_cmp,
                            tower_from_real, tower_log)

LAM = 0.2
Q_R = 2.5426413577735265        # repelling real fixed point for lam = 0.2


def _exp():
    return fam.exp_family(LAM)


def test_orbit_plain_phase_matches_direct_iteration():
    orbit = orbits.run_orbit(_exp(), complex(1.0, 0.5), 6)
    z = complex(1.0, 0.5)
    for step in orbit.steps:
        assert step.kind == "plain"
        assert step.z == z
        z = LAM * cmath.exp(z)
    assert orbit.status == orbits.STATUS_OK
    assert orbit.lift_index is None


def test_orbit_lifts_at_threshold():
    # start real and past the repelling point: magnitudes blow up fast
    orbit = orbits.run_orbit(_exp(), complex(Q_R + 1.0), 12)
    assert orbit.status == orbits.STATUS_OK
    assert orbit.lift_index is not None
    k = orbit.lift_index
    assert orbit.steps[k].kind == "log"
    # lift is exact: w = z_{k-1} + Log lam
    want = orbit.steps[k - 1].z + math.log(LAM)
    assert orbit.steps[k].z == want
    # later steps promote to towers once Re w leaves float range
    kinds = [s.kind for s in orbit.steps]
    assert "tower" in kinds
    assert kinds == sorted(kinds, key=["plain", "log", "tower"].index)


def test_orbit_magnitudes_monotone_after_escape():
    orbit = orbits.run_orbit(_exp(), complex(Q_R + 1.0), 12)
    mags = [s.magnitude() for s in orbit.steps]
    for a, b in zip(mags[2:], mags[3:]):
        assert tower_cmp(b, a) == GT


def test_orbit_deterministic():
    a = orbits.run_orbit(_exp(), complex(0.3, 0.7), 10)
    b = orbits.run_orbit(_exp(), complex(0.3, 0.7), 10)
    assert [s.z for s in a.steps] == [s.z for s in b.steps]
    assert a.status == b.status


def test_orbit_complex_stops_honestly():
    # large imaginary parts grow until cos/sin lose all precision
    orbit = orbits.run_orbit(_exp(), complex(3.6, 0.01), 40)
    assert orbit.status == orbits.STATUS_IM_LOST
    assert orbit.steps[-1].kind == "log"


def test_orbit_non_exp_family_needs_model():
    f = fam.fatou_map(1.0)
    orbit = orbits.run_orbit(f, complex(-800.0, 0.0), 10)
    assert orbit.status == orbits.STATUS_NO_MODEL


def test_orbit_attracting_basin_never_lifts():
    orbit = orbits.run_orbit(_exp(), complex(0.1), 50)
    assert orbit.status == orbits.STATUS_OK
    assert all(s.kind == "plain" for s in orbit.steps)
    # converges to the attracting fixed point
    q_a = fam.real_fixed_points(_exp())[0][0]
    assert abs(orbit.steps[-1].z - q_a) < 1e-12


def test_classify_not_escaped():
    orbit = orbits.run_orbit(_exp(), complex(0.1), 15)
    v = orbits.classify(orbit, 5.0, 4)
    assert v.escaping == orbits.ESCAPE_NOT
    assert v.fast_level == orbits.FAST_NA
    assert not v.fast_certified()


def test_classify_fast_real_ray():
    orbit = orbits.run_orbit(_exp(), complex(Q_R + 1.0), 15)
    v = orbits.classify(orbit, 5.0, 4)
    assert v.escaping == orbits.ESCAPE_CERTIFIED
    assert v.fast_certified()
    assert 0 <= v.fast_level <= 4


def test_classify_fast_level_nesting():
    # smaller fast level implies the larger-level inequality set
    orbit = orbits.run_orbit(_exp(), complex(Q_R + 2.0), 15)
    slow = orbits.run_orbit(_exp(), complex(Q_R + 0.05), 15)
    v_fast = orbits.classify(orbit, 5.0, 6)
    v_slow = orbits.classify(slow, 5.0, 6)
    assert v_fast.fast_certified() and v_slow.fast_certified()
    assert v_fast.fast_level <= v_slow.fast_level


def test_classify_inadmissible_R():
    orbit = orbits.run_orbit(_exp(), complex(1.0), 5)
    with pytest.raises(ValueError):
        orbits.classify(orbit, 0.5, 4)   # M(0.5, f) < 0.5 for lam = 0.2


def test_classify_zip_rate_blows_up():
    # fast orbits: ln ln |f^n| / n grows without bound, then leaves the
    # float range entirely (reported as inf)
    orbit = orbits.run_orbit(_exp(), complex(Q_R + 1.0), 15)
    v = orbits.classify(orbit, 5.0, 4)
    rates = [r for _, r in v.zip_rate]
    assert len(rates) >= 10
    finite = [r for r in rates if math.isfinite(r)]
    assert len(finite) >= 3
    assert all(a < b for a, b in zip(finite, finite[1:]))
    assert rates[-1] == math.inf


def test_classify_ladder_argument_matches_internal():
    orbit = orbits.run_orbit(_exp(), complex(Q_R + 1.0), 15)
    mm = fam.iterated_max_modulus(_exp(), 5.0, len(orbit.steps) - 1)
    v1 = orbits.classify(orbit, 5.0, 4)
    v2 = orbits.classify(orbit, 5.0, 4, max_mod_seq=mm)
    assert v1.fast_level == v2.fast_level
    assert v1.escaping == v2.escaping


def test_level_shift():
    assert orbits.level_shift(_exp(), 5.0, 5.0) == 0
    k = orbits.level_shift(_exp(), 5.0, 100.0)
    assert 1 <= k <= 3
    # symmetric in the two radii
    assert k == orbits.level_shift(_exp(), 100.0, 5.0)


def test_R_independence():
    orbit = orbits.run_orbit(_exp(), complex(Q_R + 1.0), 15)
    rep = orbits.check_R_independence(orbit, 5.0, 20.0, 6)
    assert rep["ok"] and rep["verdicts_agree"]
    assert rep["level_gap"] <= rep["shift_bound"]


def test_probe_growth_inequality():
    orbit = orbits.run_orbit(_exp(), complex(Q_R + 1.0), 15)
    k = orbit.lift_index
    rep = orbits.probe_growth_inequality(orbit, 0.5,
                                         range(k, len(orbit.steps) - 1))
    assert rep["all_hold"]
    with pytest.raises(ValueError):
        orbits.probe_growth_inequality(orbit, 0.5, range(0, 1))
    with pytest.raises(ValueError):
        orbits.probe_growth_inequality(orbit, 1.5, range(k, k + 1))


def test_magnitude_representations_agree():
    # the same real orbit value through plain / log / tower forms
    orbit = orbits.run_orbit(_exp(), complex(Q_R + 1.0), 12)
    for step in orbit.steps:
        if step.kind == "log":
            m = step.magnitude()
            assert log_to_float(m) == pytest.approx(step.z.real, rel=1e-12)
        elif step.kind == "plain":
            assert to_float(step.magnitude()) == pytest.approx(
                abs(step.z), rel=1e-12)


@given(st.floats(min_value=-2.0, max_value=2.0),
       st.floats(min_value=-2.0, max_value=2.0))
@settings(max_examples=100, deadline=None)
def test_orbit_prefix_stability(re, im):
    # running longer never changes the shared prefix
    a = orbits.run_orbit(_exp(), complex(re, im), 5)
    b = orbits.run_orbit(_exp(), complex(re, im), 9)
    n = min(len(a.steps), len(b.steps))
    for sa, sb in zip(a.steps[:n], b.steps[:n]):
        assert sa.kind == sb.kind
        if sa.kind == "plain":
            assert sa.z == sb.z
