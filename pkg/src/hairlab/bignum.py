"""Structured huge scalars for the slow-tract sequence construction.

The inductive sequences (r_k, u_k, ln eps_k) grow at tower rate, and the
inequalities between them often differ only by small configured margins
(a difference of 2 at a magnitude of exp(exp(300))).  Plain floats and
tower scalars both round such margins away, so values here keep their
construction structure:

    BigNum ::= float | Exp(log: BigNum, off: BigNum)   # exp(log) + off

Two quantities built from a shared sub-expression compare exactly: the
shared parts cancel symbolically (bitwise-equal floats along the same
code path), leaving the margin.  Terms genuinely below resolution are
absorbed, flagged, and are many hundreds of orders of magnitude smaller
than any margin used by callers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .towers import TowerReal, to_float, tower_add, tower_exp, \
    tower_from_real

_INF = math.inf


@dataclass(frozen=True)
class Exp:
    """exp(value(log)) + value(off)."""
    log: object                      # float or Exp
    off: object = 0.0                # float or Exp
    absorbed: bool = field(default=False, compare=False)


def is_exp(x) -> bool:
    return isinstance(x, Exp)


def was_absorbed(x) -> bool:
    if not is_exp(x):
        return False
    return x.absorbed or was_absorbed(x.log) or was_absorbed(x.off)


def to_tower(x) -> TowerReal:
    if not is_exp(x):
        return tower_from_real(x)
    return tower_add(tower_exp(to_tower(x.log)), to_tower(x.off))


def _float_of(x):
    """float value or None when out of double range."""
    if not is_exp(x):
        return float(x)
    return to_float(to_tower(x))


def b_add_small(x, c: float):
    """x + c for a small float c (folded into the outermost offset)."""
    if not is_exp(x):
        return x + c
    return Exp(x.log, b_add_small(x.off, c), absorbed=x.absorbed)


def b_sub_float(x, y) -> float:
    """value(x) - value(y) as a float, +-inf beyond double range.

    Shared structure cancels exactly, so construction margins survive
    even when both values are towers."""
    if not is_exp(x) and not is_exp(y):
        return float(x) - float(y)
    if is_exp(x) and is_exp(y):
        dl = b_sub_float(x.log, y.log)
        doff = b_sub_float(x.off, y.off)
        if dl == 0.0:
            return doff
        ly = _float_of(y.log)
        if ly is None or ly > 700.0:
            return _INF if dl > 0 else -_INF
        try:
            lead = math.exp(ly) * math.expm1(dl)
        except OverflowError:
            lead = math.copysign(_INF, dl)
        s = lead + doff
        return s
    xf, yf = _float_of(x), _float_of(y)
    if xf is None:
        # Exp values out of float range are positive-huge by construction.
        return _INF if is_exp(x) else -_INF
    if yf is None:
        return -_INF if is_exp(y) else _INF
    return xf - yf


def b_cmp(x, y) -> int:
    d = b_sub_float(x, y)
    if d > 0:
        return 1
    if d < 0:
        return -1
    return 0


def b_scale(x, s: float):
    """x * s for positive float s."""
    if s <= 0 or not math.isfinite(s):
        raise ValueError("positive finite scale required")
    if not is_exp(x):
        return x * s
    return Exp(b_add_small(x.log, math.log(s)), b_scale(x.off, s),
               absorbed=x.absorbed)


def b_add(x, y):
    """x + y; comparable Exp scales merge exactly, terms below double
    resolution are absorbed with a flag."""
    if not is_exp(x) and not is_exp(y):
        s = x + y
        if math.isfinite(s):
            return s
        # assemble as exp(log x + log1p(y/x)) to stay representable
        big, small = (x, y) if abs(x) >= abs(y) else (y, x)
        return Exp(math.log(big) + math.log1p(small / big), 0.0)
    if not is_exp(x):
        return b_add(y, x)
    if not is_exp(y):
        return Exp(x.log, b_add(x.off, y), absorbed=x.absorbed)
    # both Exp: keep the larger log outside
    dl = b_sub_float(x.log, y.log)
    if dl < 0:
        return b_add(y, x)
    off = b_add(x.off, y.off)
    if dl < 745.0:      # beyond this exp(-dl) underflows and y would vanish
        return Exp(b_add_small(x.log, math.log1p(math.exp(-dl))), off,
                   absorbed=x.absorbed or y.absorbed)
    yf = _float_of(Exp(y.log))          # e^(log y) alone
    if yf is not None:
        return Exp(x.log, b_add(off, yf),
                   absorbed=x.absorbed or y.absorbed)
    # y is unrepresentably large yet vanishing next to x: absorb.
    return Exp(x.log, off, absorbed=True)


def b_sum(*xs):
    acc = xs[0]
    for x in xs[1:]:
        acc = b_add(acc, x)
    return acc


def b_log(x):
    """ln(value(x)); the offset correction is exact while it fits a
    double and absorbed (flagged where possible) beyond."""
    if not is_exp(x):
        if x <= 0:
            raise ValueError("log of non-positive value")
        return math.log(x)
    lf = _float_of(x.log)
    off = _float_of(x.off)
    if lf is not None and lf <= 700.0 and off is not None:
        if off == 0.0:
            return x.log
        return b_add_small(x.log, math.log1p(off * math.exp(-lf)))
    # offset relatively below exp(-0.9 log): absorbed
    trivial = off == 0.0 and not is_exp(x.off)
    if trivial:
        return x.log
    if is_exp(x.log):
        return Exp(x.log.log, x.log.off, absorbed=True)
    return x.log  # float log; flag cannot be carried, documented loss


def big_to_json(x):
    if not is_exp(x):
        return float(x)
    return {"exp": big_to_json(x.log), "off": big_to_json(x.off)}


def big_from_json(d):
    if isinstance(d, dict):
        return Exp(big_from_json(d["exp"]), big_from_json(d["off"]))
    return float(d)
