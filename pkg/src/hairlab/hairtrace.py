"""Devaney-hair tracing for the exponential family.

Hair points are produced by inverse-branch pullback in the log plane:
the inverse of F(w) = e^w + Log lam restricted to the 2 pi i translate
number k is L_k(v) = Log(v - Log lam) + 2 pi i k.  A point at potential
t is a finite pullback of the real seed X_t = t + 10, with depth grown
as t -> 0 so the traced curve closes down on the hair's finite endpoint
(the repelling fixed point for the constant-0 address of real lam).
|F'| >= 2 on the relevant domain, so each pullback at least halves
distances and the depth needed for a tolerance is logarithmic in it.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from . import families as fam
from . import orbits
from .logmodel import Address, LogModel, explicit_exp_model, shift
from .towers import (GT, tower_add_log, tower_cmp, tower_exp,
                     tower_from_real, tower_scale, to_float)

SEED_OFFSET = 10.0
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class HairTrace:
    family: fam.FunctionFamily
    address: Address
    potentials: tuple          # increasing t values
    points: tuple              # plane points, same order
    depths: tuple              # pullback depth per potential
    tolerance: float
    endpoint: complex          # limit point t -> 0+

    def interior_mask(self):
        """True where the point sits more than 10 tol from the endpoint."""
        return tuple(abs(p - self.endpoint) > 10.0 * self.tolerance
                     for p in self.points)

    def t_min(self) -> float:
        for t, keep in zip(self.potentials, self.interior_mask()):
            if keep:
                return t
        return math.inf


def _pull_once(v: complex, log_lam: complex, k: int) -> complex:
    return cmath.log(v - log_lam) + TWO_PI * 1j * k


def _pullback(seed: complex, address: Address, depth: int,
              log_lam: complex) -> complex:
    w = seed
    for j in range(depth - 1, -1, -1):
        w = _pull_once(w, log_lam, address.entry(j))
    return w


def _base_depth(address: Address, tol: float) -> int:
    # Shallow on purpose: each pullback contracts toward the endpoint,
    # so depth fixes how far along the hair the trace reaches.  The
    # tolerance governs the t_min cutoff and forward-semiconjugacy
    # comparisons, not the depth.
    return max(len(address.prefix) + 1, 3)


def pullback_depth(address: Address, t: float, tol: float) -> int:
    """Depth schedule: one extra pullback per halving of t, so the trace
    approaches the endpoint as t -> 0 while staying injective in t."""
    extra = max(0, math.ceil(math.log2(1.0 / t))) if t < 1.0 else 0
    return _base_depth(address, tol) + extra


def hair_endpoint(family: fam.FunctionFamily, address: Address,
                  depth: int = 400) -> complex:
    """Limit of deep pullbacks (the finite endpoint of the hair).

    The pullback contracts by at least 1/2 per level, so depth 400 puts
    the result far below any float tolerance of interest.
    """
    lam = family.hair_parameter()
    log_lam = math.log(lam)
    w = _pullback(complex(SEED_OFFSET), address,
                  depth + len(address.prefix), log_lam)
    return cmath.exp(w)


def trace_hair(family: fam.FunctionFamily, address: Address,
               t_range, points: int, tol: float) -> HairTrace:
    """Trace a hair at `points` evenly spaced potentials in t_range."""
    lam = family.hair_parameter()
    if address.max_abs_entry() > 10_000:
        raise ValueError("address entries out of supported range")
    t_lo, t_hi = t_range
    if not 0 <= t_lo < t_hi:
        raise ValueError("need 0 <= t_lo < t_hi")
    log_lam = math.log(lam)
    ts, zs, ds = [], [], []
    step = (t_hi - t_lo) / points
    for j in range(1, points + 1):
        t = t_lo + step * j
        d = pullback_depth(address, t, tol)
        w = _pullback(complex(t + SEED_OFFSET), address, d, log_lam)
        ts.append(t)
        zs.append(cmath.exp(w))
        ds.append(d)
    endpoint = hair_endpoint(family, address)
    return HairTrace(family, address, tuple(ts), tuple(zs), tuple(ds),
                     tol, endpoint)


def advanced_potential(trace: HairTrace, t: float) -> float:
    """Potential of f(point(t)) on the shifted-address hair.

    Below t = 1 the depth schedule drops by exactly one level per
    doubling, so the image of point(t) is point(2t) up to the pullback
    contraction; at t >= 1 the depth is constant and the image potential
    is read off the seed relation F(t + offset) = t' + offset.
    """
    if t < 1.0:
        return 2.0 * t
    lam = trace.family.hair_parameter()
    return math.exp(t + SEED_OFFSET) + math.log(lam) - SEED_OFFSET


def shifted_trace_point(trace: HairTrace, t: float) -> complex:
    """Traced point of the shifted address at the advanced potential."""
    lam = trace.family.hair_parameter()
    addr = shift(trace.address, 1)
    t2 = advanced_potential(trace, t)
    d = pullback_depth(addr, t2, trace.tolerance)
    if t >= 1.0:
        # keep the exact seed relation: same depth as the source point
        d = pullback_depth(trace.address, t, trace.tolerance)
    w = _pullback(complex(t2 + SEED_OFFSET), addr, d, math.log(lam))
    return cmath.exp(w)


# ---------------------------------------------------------------------------
# Head-start ordering and the expansion lemma


@dataclass(frozen=True)
class HeadStartWitness:
    K: float
    M: float
    N: int
    leader: complex
    trailer: complex


class PreconditionError(ValueError):
    def __init__(self, failures):
        super().__init__("; ".join(failures))
        self.failures = list(failures)


def _head_start_rhs(re_zeta, K: float, M: float):
    """K (Re zeta)^+ + M as a tower scalar (re_zeta is a tower)."""
    if not re_zeta.is_positive():
        return tower_from_real(M)
    return tower_add_log(tower_scale(re_zeta, K), M)


def _ahead(re_w, re_zeta, K: float, M: float) -> bool:
    return tower_cmp(re_w, _head_start_rhs(re_zeta, K, M)) == GT


def _f_iterate_re(model: LogModel, w: complex, n_max: int):
    """[(Re F^n(w), Im or None)] for n = 0..n_max, switching to
    real-tower tracking once floats overflow (real orbits only)."""
    out = []
    cur = w
    tower_re = None
    for _ in range(n_max + 1):
        if tower_re is not None:
            out.append((tower_re, 0.0))
            tower_re = tower_add_log(tower_exp(tower_re),
                                     math.log(abs(model.lam)))
            continue
        out.append((tower_from_real(cur.real), cur.imag))
        if cur.real > 300.0 and cur.imag == 0.0 and \
                model.lam.imag == 0 and model.lam.real > 0:
            tower_re = tower_add_log(tower_exp(tower_from_real(cur.real)),
                                     math.log(model.lam.real))
        elif cur.real > 700.0:
            # no exact real-tower continuation available
            raise OverflowError
        else:
            cur = cmath.exp(cur) + model.log_lam
            if abs(cur.imag) > 1e12:
                raise OverflowError
    return out


def head_start_order(model: LogModel, w: complex, zeta: complex,
                     K: float, M: float, N_max: int):
    """First N <= N_max at which one orbit's Re part beats
    K (other)^+ + M, or 'undecided'."""
    if K <= 1 or M <= 0:
        raise ValueError("need K > 1 and M > 0")
    try:
        a = _f_iterate_re(model, complex(w), N_max)
        b = _f_iterate_re(model, complex(zeta), N_max)
    except OverflowError:
        raise ValueError("orbit left the trackable range before N_max")
    for n in range(N_max + 1):
        im_a, im_b = a[n][1], b[n][1]
        if abs(im_a - im_b) > math.pi:
            raise ValueError(f"address divergence at step {n}")
        if _ahead(a[n][0], b[n][0], K, M):
            return {"leader": "first",
                    "witness": HeadStartWitness(K, M, n, complex(w),
                                                complex(zeta))}
        if _ahead(b[n][0], a[n][0], K, M):
            return {"leader": "second",
                    "witness": HeadStartWitness(K, M, n, complex(zeta),
                                                complex(w))}
    return "undecided"


def verify_fast_lemma(model: LogModel, w: complex, zeta: complex,
                      K: float, M: float, alpha: float = 1.0,
                      beta: float = TWO_PI) -> dict:
    """One-step growth domination: with eps = (1 - 1/K) / (16 pi),
    a point ahead by K (Re zeta)^+ + M satisfies
    Re F(w) > exp(eps Re w) Re F(zeta)."""
    w, zeta = complex(w), complex(zeta)
    if K <= 1 or M <= 0:
        raise ValueError("need K > 1 and M > 0")
    if max(w.real, zeta.real) > 690.0:
        raise ValueError("points beyond float evaluation range")
    fw = cmath.exp(w) + model.log_lam
    fz = cmath.exp(zeta) + model.log_lam
    failures = []
    if not w.real > K * max(zeta.real, 0.0) + M:
        failures.append(f"head start fails: Re w = {w.real:.6g} <= "
                        f"K (Re zeta)^+ + M = "
                        f"{K * max(zeta.real, 0.0) + M:.6g}")
    if round(w.imag / TWO_PI) != round(zeta.imag / TWO_PI):
        failures.append("points lie in different tracts")
    slope_rhs = alpha * max(fw.real, fz.real) + beta
    if not abs(fw.imag - fz.imag) <= slope_rhs:
        failures.append(f"slope hypothesis fails: |Im dF| = "
                        f"{abs(fw.imag - fz.imag):.6g} > {slope_rhs:.6g}")
    if failures:
        raise PreconditionError(failures)
    eps = (1.0 - 1.0 / K) / (16.0 * math.pi)
    rhs = math.exp(eps * w.real) * fz.real
    intermediate = math.exp(abs(w - zeta) / (16.0 * math.pi)) * fz.real
    return {"epsilon": eps, "lhs": fw.real, "rhs": rhs,
            "intermediate": intermediate, "holds": fw.real > rhs}


def certify_hair_fast(trace: HairTrace, R: float, horizon: int,
                      L_max: int) -> dict:
    """Classify every interior traced point; aggregates fast levels."""
    mask = trace.interior_mask()
    mm = fam.iterated_max_modulus(trace.family, R, horizon)
    rows = []
    for t, z, keep in zip(trace.potentials, trace.points, mask):
        if not keep:
            rows.append({"t": t, "interior": False, "fast_level": None})
            continue
        orbit = orbits.run_orbit(trace.family, z, horizon)
        v = orbits.classify(orbit, R, L_max, max_mod_seq=mm)
        rows.append({"t": t, "interior": True,
                     "escaping": v.escaping,
                     "fast_level": v.fast_level if v.fast_certified()
                     else None})
    interior = [r for r in rows if r["interior"]]
    certified = [r for r in interior if r["fast_level"] is not None]
    return {"R": R, "horizon": horizon, "L_max": L_max,
            "t_min": trace.t_min(), "rows": rows,
        "interior_count": len(interior),
        "all_certified": bool(interior) and len(certified) == len(interior),
        "max_level": max((r["fast_level"] for r in certified),
                         default=None)}
