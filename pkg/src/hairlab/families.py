"""Concrete entire-function families and their maximum-modulus growth.

Four families are supported:

  * ``exp``    f(z) = lam * e^z           (hair routines need real lam in (0, 1/e))
  * ``fatou``  f(z) = z + lam + e^(-z)    (Re lam > 0)
  * ``affine`` f(z) = m z + lam + e^(-z)  (m >= 2)
  * ``star``   g(w) = e^(-lam) w^m e^(-w) (self-map of C*, m >= 1)

The fatou/affine families are semiconjugate to star maps through
pi(z) = e^(-z); ``check_semiconjugacy`` measures the functional-equation
residual on a reproducible sample.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .towers import (TowerReal, tower_add, tower_add_log, tower_cmp,
                     tower_exp, tower_from_real, tower_log, tower_scale,
                     to_float, GT)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0

EXP_KIND = "exp"
FATOU_KIND = "fatou"
AFFINE_KIND = "affine"
STAR_KIND = "star"

_KINDS = (EXP_KIND, FATOU_KIND, AFFINE_KIND, STAR_KIND)


class NeedsLogLift(OverflowError):
    """Raised when |f(z)| leaves machine range; caller must switch to
    logarithmic coordinates."""

    def __init__(self, z):
        super().__init__(f"evaluation at {z!r} overflows; log-lift required")
        self.point = z


@dataclass(frozen=True)
class FunctionFamily:
    kind: str
    lam: complex
    m: int = 1

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.kind == FATOU_KIND and self.lam.real <= 0:
            raise ValueError("fatou family needs Re lam > 0")
        if self.kind == AFFINE_KIND and self.m < 2:
            raise ValueError("affine family needs m >= 2")
        if self.kind == STAR_KIND and self.m < 1:
            raise ValueError("star family needs m >= 1")
        if self.kind in (EXP_KIND, FATOU_KIND) and self.m != 1:
            raise ValueError(f"{self.kind} family has no degree parameter")

    def hair_parameter(self) -> float:
        """Real lam, for routines restricted to 0 < lam < 1/e."""
        lam = self.lam
        if lam.imag != 0 or not 0.0 < lam.real < 1.0 / math.e:
            raise ValueError("requires real lam with 0 < lam < 1/e")
        return lam.real

    def label(self) -> str:
        if self.kind in (AFFINE_KIND, STAR_KIND):
            return f"{self.kind}(lam={self.lam}, m={self.m})"
        return f"{self.kind}(lam={self.lam})"


def exp_family(lam) -> FunctionFamily:
    return FunctionFamily(EXP_KIND, complex(lam))


def fatou_map(lam) -> FunctionFamily:
    return FunctionFamily(FATOU_KIND, complex(lam))


def affine_exp(m: int, lam) -> FunctionFamily:
    return FunctionFamily(AFFINE_KIND, complex(lam), m)


def star_map(lam, m: int = 1) -> FunctionFamily:
    return FunctionFamily(STAR_KIND, complex(lam), m)


def evaluate(family: FunctionFamily, z: complex) -> complex:
    """f(z) per the family formula; raises NeedsLogLift on overflow."""
    z = complex(z)
    try:
        if family.kind == EXP_KIND:
            w = family.lam * cmath.exp(z)
        elif family.kind == FATOU_KIND:
            w = z + family.lam + cmath.exp(-z)
        elif family.kind == AFFINE_KIND:
            w = family.m * z + family.lam + cmath.exp(-z)
        else:
            w = cmath.exp(-family.lam) * z ** family.m * cmath.exp(-z)
    except OverflowError:
        raise NeedsLogLift(z) from None
    if not (math.isfinite(w.real) and math.isfinite(w.imag)):
        raise NeedsLogLift(z)
    return w


def _circle_log_abs(family: FunctionFamily, r: float, theta: float) -> float:
    z = r * cmath.exp(1j * theta)
    try:
        v = evaluate(family, z)
    except NeedsLogLift:
        # |f| is dominated by the e^(-z) term here; return its exponent.
        return -r * math.cos(theta)
    av = abs(v)
    return math.log(av) if av > 0 else -math.inf

def _golden_max(f, a: float, b: float, tol: float = 1e-12) -> float:
    """Golden-section search for the maximizer of f on [a, b]."""
    h = b - a
    c, d = a + INV_PHI2 * h, a + INV_PHI * h
    yc, yd = f(c), f(d)
    while h > tol:
        if yc > yd:
            b, d, yd = d, c, yc
            h = INV_PHI * h
            c = a + INV_PHI2 * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = f(d)
    return 0.5 * (a + b)


def max_modulus(family: FunctionFamily, r: float,
                samples: int = 4096) -> TowerReal:
    """M(r, f) = max |f| over |z| = r, as a tower scalar.

    Closed forms are used where the circle maximum is known exactly
    (exp: |lam| e^r at z = r; star: e^(-Re lam) r^m e^r at w = -r);
    other families are circle-sampled and refined by golden-section
    search around the argmax.
    """
    if r <= 0:
        raise ValueError("max_modulus needs r > 0")
    if family.kind == EXP_KIND:
        return tower_exp(tower_add_log(tower_from_real(r),
                                       math.log(abs(family.lam))))
    if family.kind == STAR_KIND:
        log_m = tower_add(tower_from_real(r),
                          tower_from_real(family.m * math.log(r)
                                          - family.lam.real))
        return tower_exp(log_m)
    if r > 600.0:
        # e^r swamps the polynomial part beyond double precision.
        return tower_exp(tower_from_real(r))
    f = lambda th: _circle_log_abs(family, r, th)
    thetas = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
    values = [f(t) for t in thetas]
    i = int(np.argmax(values))
    step = 2.0 * math.pi / samples
    t_best = _golden_max(f, thetas[i] - step, thetas[i] + step)
    log_m = max(f(t_best), values[i])
    return tower_exp(tower_from_real(log_m))


def iterated_max_modulus(family: FunctionFamily, R: float,
                         n: int) -> list[TowerReal]:
    """[M^1(R,f), ..., M^n(R,f)] in tower scalars.

    R must already be past the escape threshold (M(R,f) > R), otherwise
    the recursion is not monotone and the fast-escape comparison is
    meaningless.
    """
    m1 = max_modulus(family, R)
    if tower_cmp(m1, tower_from_real(R)) != GT:
        raise ValueError(f"R={R} below escape threshold: M(R,f) <= R")
    out = []
    cur = m1
    for _ in range(n):
        out.append(cur)
        cur = _max_modulus_tower(family, cur)
    return out


def _max_modulus_tower(family: FunctionFamily, r: TowerReal) -> TowerReal:
    """M(value(r), f) where r may exceed float range."""
    rf = to_float(r)
    if rf is not None and (family.kind == EXP_KIND or rf <= 600.0):
        return max_modulus(family, rf)
    if family.kind == STAR_KIND:
        log_m = tower_add(r, tower_scale(tower_log(r), family.m))
        return tower_exp(tower_add_log(log_m, -family.lam.real))
    # fatou/affine beyond machine range: M(r) = e^r up to a relative
    # error below e^(-r), invisible at tower granularity.
    return tower_exp(r)


# ---------------------------------------------------------------------------
# Semiconjugacy pi(f(z)) = g(pi(z)), pi(z) = e^(az)


@dataclass(frozen=True)
class SemiconjugacyReport:
    family: FunctionFamily
    target: FunctionFamily
    a: complex
    samples: int
    seed: int
    max_residual: float


def _matched_pair(f: FunctionFamily, g: FunctionFamily, a: complex) -> bool:
    if g.kind != STAR_KIND or a != -1:
        return False
    if f.kind == FATOU_KIND:
        return g.m == 1 and g.lam == f.lam
    if f.kind == AFFINE_KIND:
        return g.m == f.m and g.lam == f.lam
    return False


def semiconjugacy_residual(f: FunctionFamily, g: FunctionFamily,
                           z: complex, a: complex = -1) -> float:
    """Relative defect of pi(f(z)) = g(pi(z)) at one point."""
    lhs = cmath.exp(a * evaluate(f, z))
    rhs = evaluate(g, cmath.exp(a * z))
    scale = max(1.0, abs(lhs), abs(rhs))
    return abs(lhs - rhs) / scale


def check_semiconjugacy(f: FunctionFamily, g: FunctionFamily,
                        a: complex = -1, samples: int = 10_000,
                        seed: int = 2024) -> SemiconjugacyReport:
    if not _matched_pair(f, g, complex(a)):
        raise ValueError(f"unsupported pair {f.label()} / {g.label()} "
                         f"with a={a}")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-5.0, 5.0, size=(samples, 2))
    worst = 0.0
    for re, im in pts:
        worst = max(worst, semiconjugacy_residual(f, g, complex(re, im), a))
    return SemiconjugacyReport(f, g, complex(a), samples, seed, worst)


def criterion_halfplane(m: int, lam) -> bool:
    """Half-plane condition Re lam > 1 + m (ln m - 1) guaranteeing the
    star map's critical value m^m e^(-m-lam) lies in |w| < 1/e."""
    if m < 1:
        raise ValueError("m >= 1 required")
    lam = complex(lam)
    ok = lam.real > 1.0 + m * (math.log(m) - 1.0)
    if ok:
        crit = m * math.log(m) - m - lam.real  # log of the critical value
        assert crit < -1.0, "half-plane criterion inconsistent with |cv|<1/e"
    return ok


def criterion_halfline(m: int, lam: float) -> bool:
    """Real half-line condition lam > (m-1)(ln(m-1) - 1); when it holds,
    0 < g(u) < u is spot-checked on a log grid in (0, 50]."""
    if m < 2:
        raise ValueError("m >= 2 required")
    lam = float(lam)
    ok = lam > (m - 1) * (math.log(m - 1) - 1.0)
    if ok:
        g = star_map(lam, m)
        for u in np.geomspace(1e-3, 50.0, 64):
            gu = evaluate(g, complex(u)).real
            assert 0.0 < gu < u, f"0 < g(u) < u fails at u={u}"
    return ok


def real_fixed_points(family: FunctionFamily):
    """The two real solutions of lam e^q = q for exp families with
    0 < lam < 1/e, as (point, multiplier) pairs, attracting first.

    At a fixed point the multiplier lam e^q equals q itself.
    """
    lam = family.hair_parameter()
    if family.kind != EXP_KIND:
        raise ValueError("real fixed points: exp family only")

    def h(q):
        return lam * math.exp(q) - q

    def bisect(lo, hi):
        flo = h(lo)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fm = h(mid)
            if hi - lo < 1e-12:
                break
            if (fm > 0) == (flo > 0):
                lo, flo = mid, fm
            else:
                hi = mid
        return 0.5 * (lo + hi)

    # h(0) = lam > 0, h(1) = lam e - 1 < 0; the second sign change is
    # bracketed by doubling.
    q_a = bisect(0.0, 1.0)
    hi = 2.0
    while h(hi) < 0:
        hi *= 2.0
        if hi > 1e3:
            raise RuntimeError("failed to bracket the repelling fixed point")
    q_r = bisect(1.0, hi)
    return [(q_a, q_a), (q_r, q_r)]


def basin_convergence_heuristic(g: FunctionFamily, v: complex,
                                steps: int = 10_000,
                                tol: float = 1e-6) -> dict:
    """Orbit-convergence stand-in for immediate-basin membership of a
    star-map critical value.  Heuristic only: a converged orbit shows the
    value is attracted to 0, not that it lies in the immediate basin.
    """
    z = complex(v)
    for n in range(steps):
        if abs(z) < tol:
            return {"converged": True, "steps": n, "heuristic": True}
        try:
            z = evaluate(g, z)
        except NeedsLogLift:
            return {"converged": False, "steps": n, "heuristic": True}
    return {"converged": False, "steps": steps, "heuristic": True}


def star_critical_value(g: FunctionFamily) -> complex:
    """m^m e^(-m-lam), the finite critical value of the star map."""
    if g.kind != STAR_KIND:
        raise ValueError("star family only")
    return (g.m ** g.m) * cmath.exp(-g.m - g.lam)
