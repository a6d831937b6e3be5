"""Logarithmic change of variable for the exponential family.

For f(z) = lam e^z the lift F(w) = e^w + Log lam satisfies
exp F(w) = f(e^w) exactly, so |f|-growth in the plane becomes Re F
growth in the log plane.  The module also carries external addresses
(which 2 pi i translate of the base tract an orbit visits), the
derivative expansion estimate, and the two-rate domination radius used
to compare escape speeds.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from scipy.special import lambertw

from .towers import (TowerReal, tower_add_log, tower_exp, tower_from_real,
                     tower_le, tower_scale)

TWO_PI = 2.0 * math.pi

EXPLICIT_EXP = "explicit-exp"
BOUNDED = "bounded"


@dataclass(frozen=True)
class LogModel:
    """kind 'explicit-exp': F(w) = e^w + Log lam (principal branch, fixed
    at construction).  kind 'bounded': no pointwise values, only real-axis
    bound functions supplied by the tract module."""

    kind: str
    lam: complex = 0.0
    bound_fn: object = None

    def __post_init__(self):
        if self.kind == EXPLICIT_EXP:
            if self.lam == 0:
                raise ValueError("explicit model needs lam != 0")
        elif self.kind == BOUNDED:
            if self.bound_fn is None:
                raise ValueError("bounded model needs bound functions")
        else:
            raise ValueError(f"unknown log model kind {self.kind!r}")

    @property
    def log_lam(self) -> complex:
        return cmath.log(self.lam)

    def normalization_offset(self) -> float:
        """Smallest half-integer R0 with |F'(w)| >= 2 for Re w >= R0,
        found by sampling Re w on a half-integer grid."""
        if self.kind != EXPLICIT_EXP:
            raise ValueError("normalization needs pointwise derivatives")
        r0 = 0.0
        while math.exp(r0) < 2.0:  # |F'(w)| = e^(Re w)
            r0 += 0.5
        return r0


def explicit_exp_model(lam) -> LogModel:
    return LogModel(EXPLICIT_EXP, complex(lam))


def bounded_model(bound_fn) -> LogModel:
    return LogModel(BOUNDED, bound_fn=bound_fn)


def tract_index(w: complex) -> int:
    """Index of the nearest 2 pi i translate of the base strip."""
    return round(w.imag / TWO_PI)


@dataclass(frozen=True)
class LogValue:
    value: complex
    tract: int


def log_eval(model: LogModel, w: complex) -> LogValue:
    """F(w) with the tract index of the image point."""
    if model.kind != EXPLICIT_EXP:
        raise ValueError("bounded models have no pointwise values")
    w = complex(w)
    if w.real > 700.0:
        raise OverflowError("Re w beyond machine exp range; use tower "
                            "tracking in the escape module")
    v = cmath.exp(w) + model.log_lam
    return LogValue(v, tract_index(v))


def log_max(model: LogModel, r: float) -> TowerReal:
    """M(r, F) = max of Re F on Re w = r.

    Explicit model: e^r + ln|lam|, attained where e^w is real positive.
    Bounded model: the upper bound B(r); callers must treat it as a
    one-sided estimate.
    """
    if model.kind == EXPLICIT_EXP:
        return tower_add_log(tower_exp(tower_from_real(r)),
                             math.log(abs(model.lam)))
    return model.bound_fn(r).hi


@dataclass(frozen=True)
class ExpansionReport:
    lhs: float
    rhs: float
    holds: bool


def check_expansion(model: LogModel, w: complex, R: float) -> ExpansionReport:
    """Derivative growth check |F'(w)| >= (Re F(w) - R) / (4 pi),
    valid wherever Re F(w) > R."""
    if model.kind != EXPLICIT_EXP:
        raise ValueError("explicit model required")
    w = complex(w)
    re_f = (cmath.exp(w) + model.log_lam).real
    if re_f <= R:
        raise ValueError(f"precondition Re F(w) > R fails: "
                         f"{re_f:.6g} <= {R:.6g}")
    lhs = math.exp(w.real)  # |F'(w)| = |e^w|
    rhs = (re_f - R) / (4.0 * math.pi)
    return ExpansionReport(lhs, rhs, lhs >= rhs)


def omega_domination_radius(epsilon: float, delta: float, r: float) -> float:
    """Radius R making the slow rate omega(t) = e^(eps t), started at R,
    dominate the fast rate Omega(t) = e^(delta t) started at r.

    R = max{s r, (2/eps) ln s, t*} with s = 2 delta / eps and t* the
    point past which e^(eps t) >= t stays true (the upper branch solution
    of e^(eps t) = t; 0 when eps >= 1/e and the graphs never cross).
    """
    if not delta > epsilon > 0:
        raise ValueError("need delta > epsilon > 0")
    if r <= 0:
        raise ValueError("need r > 0")
    s = 2.0 * delta / epsilon
    t_star = 0.0
    if epsilon < 1.0 / math.e:
        t_star = float(-lambertw(-epsilon, -1).real) / epsilon
    return max(s * r, (2.0 / epsilon) * math.log(s), t_star)


def verify_omega_domination(epsilon: float, delta: float, r: float,
                            R: float, n_max: int) -> bool:
    """Induction invariant Omega^n(r) <= (1/s) omega^n(R) for n <= n_max,
    iterated in tower arithmetic."""
    if min(epsilon, delta, r, R) <= 0:
        raise ValueError("inputs must be positive")
    s = 2.0 * delta / epsilon
    big = tower_from_real(r)
    small = tower_from_real(R)
    for _ in range(n_max):
        big = tower_exp(tower_scale(big, delta))
        small = tower_exp(tower_scale(small, epsilon))
        if not tower_le(big, tower_scale(small, 1.0 / s)):
            return False
    return True


# ---------------------------------------------------------------------------
# External addresses


@dataclass(frozen=True)
class Address:
    """Eventually periodic tract itinerary: finite prefix, then the tail
    repeated forever.  entry(k) is the tract index at time k."""

    prefix: tuple = ()
    tail: tuple = (0,)

    def __post_init__(self):
        if len(self.tail) == 0:
            raise ValueError("periodic tail must be non-empty")
        for e in self.prefix + self.tail:
            if not isinstance(e, int):
                raise ValueError("address entries must be integers")

    def entry(self, k: int) -> int:
        if k < len(self.prefix):
            return self.prefix[k]
        return self.tail[(k - len(self.prefix)) % len(self.tail)]

    def max_abs_entry(self) -> int:
        return max((abs(e) for e in self.prefix + self.tail), default=0)

    def label(self) -> str:
        pre = "".join(f"{e}," for e in self.prefix)
        return f"{pre}({','.join(str(e) for e in self.tail)})*"


def constant_address(n: int = 0) -> Address:
    return Address((), (n,))


def shift(address: Address, k: int) -> Address:
    """Drop the first k entries (the itinerary of the image orbit)."""
    if k < 0:
        raise ValueError("shift count must be nonnegative")
    p = len(address.prefix)
    if k <= p:
        return Address(address.prefix[k:], address.tail)
    rot = (k - p) % len(address.tail)
    return Address((), address.tail[rot:] + address.tail[:rot])
