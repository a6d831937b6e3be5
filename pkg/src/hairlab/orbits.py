"""Orbit iteration with overflow-safe coordinates, and bounded-horizon
classification of escape behaviour.

Orbits start in plain complex coordinates.  When |f^k(z)| passes the
lift threshold the point is re-represented by a logarithm w with
exp(w) = f^k(z), and iteration continues through the log transform
F(w) = e^w + Log lam (exponential family only).  Once Re w itself
leaves machine range, real orbits continue exactly in tower scalars;
complex orbits stop with an honest "imaginary precision exhausted"
status, because cos/sin of the accumulated imaginary part are no longer
meaningful.

All verdicts are bounded-horizon: "certified-at-horizon" never claims
membership of the true infinite-horizon escaping set.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from . import families as fam
from .towers import (E, GT, LT, TowerReal, log_to_float, to_float,
                     tower_add_log, tower_cmp, tower_exp, tower_from_real,
                     tower_log, tower_scale)

LIFT_THRESHOLD = 1e100
# Beyond this |Im w| the float value of cos(Im w) carries no information.
IM_PRECISION_LIMIT = 1e12
# Re w above which e^w cannot be evaluated in doubles.
RE_FLOAT_LIMIT = 700.0

STATUS_OK = "completed"
STATUS_IM_LOST = "imaginary-precision-exhausted"
STATUS_NO_MODEL = "needs-log-model"

ESCAPE_CERTIFIED = "certified-at-horizon"
ESCAPE_NOT = "not-escaped-at-horizon"

FAST_NA = "not-applicable"


@dataclass(frozen=True)
class OrbitStep:
    """One orbit point in one of three representations:
    kind 'plain': the value z itself;
    kind 'log':   w with exp(w) = point, both parts floats;
    kind 'tower': real point exp(re) with re a tower scalar (im = 0)."""

    kind: str
    z: complex = 0j
    re: TowerReal = None
    im: float = 0.0
    tract: int = 0

    def magnitude(self) -> TowerReal:
        """|point| as a tower scalar."""
        if self.kind == "plain":
            return tower_from_real(abs(self.z))
        if self.kind == "log":
            return tower_exp(tower_from_real(self.z.real))
        return tower_exp(self.re)

    def lifted(self) -> bool:
        return self.kind != "plain"

    def log_re(self) -> TowerReal:
        """Re w for lifted steps."""
        if self.kind == "log":
            return tower_from_real(self.z.real)
        if self.kind == "tower":
            return self.re
        raise ValueError("plain step has no log representation")


def _plain(z: complex) -> OrbitStep:
    return OrbitStep("plain", z=complex(z))


def _logstep(w: complex) -> OrbitStep:
    return OrbitStep("log", z=complex(w),
                     tract=round(w.imag / (2.0 * math.pi)))


def _towerstep(re: TowerReal) -> OrbitStep:
    return OrbitStep("tower", re=re)


@dataclass
class OrbitRecord:
    family: fam.FunctionFamily
    start: complex
    steps: list
    horizon: int
    status: str
    lift_index: int | None = None
    verdict: object = None


@dataclass(frozen=True)
class ClassificationVerdict:
    escaping: str
    zip_rate: tuple              # ((n, rate) ...), rate may be math.inf
    fast_level: object           # int L, ("refuted-up-to", L_max), or FAST_NA
    R_used: float

    def fast_certified(self) -> bool:
        return isinstance(self.fast_level, int)


def run_orbit(family: fam.FunctionFamily, z0: complex,
              horizon: int) -> OrbitRecord:
    """Iterate f for `horizon` steps with automatic representation
    hand-off.  steps[k] is f^k(z0); len(steps) <= horizon + 1."""
    if horizon < 1:
        raise ValueError("horizon >= 1 required")
    z0 = complex(z0)
    steps = [_plain(z0)]
    status = STATUS_OK
    lift_index = None
    log_lam = cmath.log(family.lam) if family.lam != 0 else 0j
    lam_real_pos = family.lam.imag == 0 and family.lam.real > 0

    for k in range(horizon):
        cur = steps[-1]
        if cur.kind == "plain":
            try:
                z = fam.evaluate(family, cur.z)
            except fam.NeedsLogLift:
                z = None
            if z is None or abs(z) > LIFT_THRESHOLD:
                if family.kind != fam.EXP_KIND:
                    status = STATUS_NO_MODEL
                    break
                # exp(z_k + Log lam) = lam e^(z_k) = f(z_k), exactly.
                steps.append(_logstep(cur.z + log_lam))
                lift_index = k + 1
            else:
                steps.append(_plain(z))
        elif cur.kind == "log":
            w = cur.z
            if abs(w.imag) > IM_PRECISION_LIMIT:
                status = STATUS_IM_LOST
                break
            if w.real <= RE_FLOAT_LIMIT:
                steps.append(_logstep(cmath.exp(w) + log_lam))
            elif w.imag == 0.0 and lam_real_pos:
                re = tower_add_log(tower_exp(tower_from_real(w.real)),
                                   log_lam.real)
                steps.append(_towerstep(re))
            else:
                status = STATUS_IM_LOST
                break
        else:
            # real tower phase: Re F = e^(Re w) + ln lam, exact.
            steps.append(_towerstep(
                tower_add_log(tower_exp(cur.re), log_lam.real)))
    return OrbitRecord(family, z0, steps, horizon, status, lift_index)


def _magnitudes(orbit: OrbitRecord) -> list:
    return [s.magnitude() for s in orbit.steps]


def _escape_certified(mags, R: float) -> bool:
    """Final magnitude above max(R, 1e4) and strictly increasing over the
    last five steps (plateaued orbits fail the strict comparison)."""
    if len(mags) < 2:
        return False
    gate = tower_from_real(max(R, 1e4))
    if tower_cmp(mags[-1], gate) != GT:
        return False
    tail = mags[-min(6, len(mags)):]
    return all(tower_cmp(tail[i + 1], tail[i]) == GT
               for i in range(len(tail) - 1))


def _zip_rates(mags) -> tuple:
    e_gate = tower_from_real(E)
    out = []
    for n in range(1, len(mags)):
        if tower_cmp(mags[n], e_gate) != GT:
            continue
        lnln = tower_log(tower_log(mags[n]))
        v = to_float(lnln)
        out.append((n, v / n if v is not None else math.inf))
    return tuple(out)


def admissible_R(family: fam.FunctionFamily, R: float) -> bool:
    """Stand-in admissibility: M(R, f) > R."""
    try:
        return tower_cmp(fam.max_modulus(family, R),
                         tower_from_real(R)) == GT
    except ValueError:
        return False


def classify(orbit: OrbitRecord, R: float, L_max: int,
             max_mod_seq=None) -> ClassificationVerdict:
    """Bounded-horizon classification against the iterated maximum
    modulus ladder M^n(R, f).

    fast_level is the smallest L <= L_max with |f^(n+L)(z)| >= M^n(R,f)
    for every n >= 1 with n + L inside the computed orbit; the ladder can
    be passed in (`max_mod_seq`) to amortize grid classification.
    """
    if not admissible_R(orbit.family, R):
        raise ValueError(f"R={R} inadmissible: M(R,f) <= R")
    mags = _magnitudes(orbit)
    zips = _zip_rates(mags)
    escaped = orbit.status == STATUS_OK and _escape_certified(mags, R)
    if not escaped:
        verdict = ClassificationVerdict(ESCAPE_NOT, zips, FAST_NA, R)
        orbit.verdict = verdict
        return verdict
    n_top = len(mags) - 1
    if max_mod_seq is None:
        max_mod_seq = fam.iterated_max_modulus(orbit.family, R, n_top)
    fast = ("refuted-up-to", L_max)
    for L in range(L_max + 1):
        ok = True
        for n in range(1, n_top - L + 1):
            if tower_cmp(mags[n + L], max_mod_seq[n - 1]) == LT:
                ok = False
                break
        if ok:
            fast = L
            break
    verdict = ClassificationVerdict(ESCAPE_CERTIFIED, zips, fast, R)
    orbit.verdict = verdict
    return verdict


def level_shift(family: fam.FunctionFamily, R1: float, R2: float,
                k_max: int = 50) -> int:
    """Smallest k with M^k(min(R1,R2), f) >= max(R1,R2)."""
    lo, hi = min(R1, R2), max(R1, R2)
    cur = tower_from_real(lo)
    gate = tower_from_real(hi)
    for k in range(k_max + 1):
        if tower_cmp(cur, gate) != LT:
            return k
        cur = fam.max_modulus(family, to_float(cur)) if to_float(cur) \
            else cur
    raise RuntimeError("level shift not found within k_max iterations")


def check_R_independence(orbit: OrbitRecord, R1: float, R2: float,
                         L_max: int) -> dict:
    """Verdict agreement and level-shift bound under a change of R."""
    v1 = classify(orbit, R1, L_max)
    v2 = classify(orbit, R2, L_max)
    shift = level_shift(orbit.family, R1, R2)
    agree = v1.escaping == v2.escaping and \
        v1.fast_certified() == v2.fast_certified()
    ok = agree
    d = None
    if v1.fast_certified() and v2.fast_certified():
        d = abs(v1.fast_level - v2.fast_level)
        ok = agree and d <= shift
    return {"R1": R1, "R2": R2, "verdicts_agree": agree,
            "level_1": v1.fast_level, "level_2": v2.fast_level,
            "level_gap": d, "shift_bound": shift, "ok": ok}


def probe_growth_inequality(orbit: OrbitRecord, epsilon: float,
                            n_range) -> dict:
    """Per-step table of Re F^(n+1)(w) > (1/eps) M(eps Re F^n(w), F)
    along a lifted exponential-family orbit, in tower arithmetic."""
    if orbit.family.kind != fam.EXP_KIND:
        raise ValueError("explicit log model exists for exp family only")
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon in (0, 1] required")
    ln_abs_lam = math.log(abs(orbit.family.lam))
    rows = []
    for n in n_range:
        if n + 1 >= len(orbit.steps):
            break
        a, b = orbit.steps[n], orbit.steps[n + 1]
        if not (a.lifted() and b.lifted()):
            raise ValueError(f"orbit not in log coordinates at step {n}")
        lhs = b.log_re()
        m = tower_add_log(tower_exp(tower_scale(a.log_re(), epsilon)),
                          ln_abs_lam)
        rhs = tower_scale(m, 1.0 / epsilon)
        c = tower_cmp(lhs, rhs)
        holds = c == GT
        if c == 0 and epsilon < 1.0:
            # Indistinguishable at tower resolution (scalar factors are
            # absorbed above height 2).  Analytic fallback: with
            # x = Re F^n and |c| = |ln lam|, e^x + c > (1/eps)(e^(eps x) + c)
            # whenever (1 - eps) x >= ln(2 (1 + |c|) / eps) and
            # e^x >= 2 |c|, both checked as float gates against x.
            gate = max(math.log(2.0 * (1.0 + abs(ln_abs_lam)) / epsilon)
                       / (1.0 - epsilon),
                       math.log(2.0 * abs(ln_abs_lam) + 2.0))
            holds = tower_cmp(a.log_re(), tower_from_real(gate)) == GT
        rows.append({"n": n, "holds": holds})
    if not rows:
        raise ValueError("n_range contains no lifted orbit steps")
    return {"epsilon": epsilon, "rows": rows,
            "all_hold": all(r["holds"] for r in rows)}
