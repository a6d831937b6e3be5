"""Signed tower-of-exponentials scalars.

A TowerReal stores sign * exp^h(x) with the mantissa x kept in a canonical
band ([1, e) for height >= 1, [0, e) for height 0), so that comparing two
values reduces to comparing (sign, height, mantissa) lexicographically.
This is the number system used for every iterated-maximum-modulus and
escape-rate inequality in the package: magnitudes like exp(exp(exp(40)))
are exact here while any float representation saturates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

E = math.e

# Comparison results.
LT, EQ, GT = -1, 0, 1

# Two mantissas within this of each other (same sign, same height) compare EQ.
MANTISSA_TOL = 1e-9

# Largest argument exp() can take before an IEEE double overflows.
_EXP_MAX = 709.0


class TowerError(ValueError):
    pass


@dataclass(frozen=True)
class TowerReal:
    """sign * exp^height(mantissa), canonical form.

    The bookkeeping flags (``absorbed``, ``underflow``) do not take part in
    equality or ordering; they record that an operation's result differs
    from the exact one by less than ``absorption_bound`` (relative).
    """

    sign: int
    height: int
    mantissa: float
    absorbed: bool = field(default=False, compare=False)
    absorption_bound: float = field(default=0.0, compare=False)
    underflow: bool = field(default=False, compare=False)

    def __repr__(self):
        flags = ""
        if self.absorbed:
            flags += "~"
        if self.underflow:
            flags += "v"
        return f"Tower({self.sign:+d},{self.height},{self.mantissa:.12g}{flags})"

    def is_zero(self):
        return self.sign == 0

    def is_positive(self):
        return self.sign > 0


ZERO = TowerReal(0, 0, 0.0)
ONE = TowerReal(1, 0, 1.0)


def _canonical(sign: int, height: int, mag: float) -> TowerReal:
    """Normalize a (sign, height, magnitude-mantissa) triple."""
    if sign == 0 or (height == 0 and mag == 0.0):
        return ZERO
    x, h = mag, height
    while x >= E:
        x = math.log(x)
        h += 1
    while h >= 1 and x < 1.0:
        x = math.exp(x)
        h -= 1
    if h == 0 and x == 0.0:
        return ZERO
    return TowerReal(sign, h, x)


def normalize(t: TowerReal) -> TowerReal:
    """Idempotent canonicalization (accepts out-of-band mantissas)."""
    return _canonical(t.sign, t.height, t.mantissa)


def tower_from_real(x: float) -> TowerReal:
    if not math.isfinite(x):
        raise TowerError(f"non-finite input {x!r}")
    if x == 0.0:
        return ZERO
    sign = 1 if x > 0 else -1
    return _canonical(sign, 0, abs(x))


def to_float(t: TowerReal) -> float | None:
    """Exact float value, or None if it does not fit in a double."""
    if t.sign == 0:
        return 0.0
    x = t.mantissa
    for _ in range(t.height):
        if x > _EXP_MAX:
            return None
        x = math.exp(x)
    return t.sign * x


def log_to_float(t: TowerReal) -> float | None:
    """float value of ln(t) for positive t, or None if even that overflows."""
    if t.sign <= 0:
        raise TowerError("log of non-positive tower")
    if t.height == 0:
        return math.log(t.mantissa)
    return to_float(TowerReal(1, t.height - 1, t.mantissa))


def tower_exp(t: TowerReal) -> TowerReal:
    if t.sign == 0:
        return ONE
    if t.sign > 0:
        if t.height == 0 and t.mantissa < 1.0:
            return _canonical(1, 0, math.exp(t.mantissa))
        return TowerReal(1, t.height + 1, t.mantissa)
    # Negative argument: representable results are computed directly,
    # anything smaller is the flagged zero-adjacent value.
    mag = to_float(TowerReal(1, t.height, t.mantissa))
    if mag is not None and mag <= 745.0:
        v = math.exp(-mag)
        if v > 0.0:
            return _canonical(1, 0, v)
    return TowerReal(1, 0, 0.0, underflow=True)


def tower_log(t: TowerReal) -> TowerReal:
    if t.sign <= 0 or (t.height == 0 and t.mantissa == 0.0):
        raise TowerError("log of non-positive tower")
    if t.height >= 1:
        return _canonical(1, t.height - 1, t.mantissa)
    return tower_from_real(math.log(t.mantissa))


def tower_cmp(a: TowerReal, b: TowerReal) -> int:
    """LT / EQ / GT, with EQ meaning mantissas agree within MANTISSA_TOL."""
    if a.sign != b.sign:
        return LT if a.sign < b.sign else GT
    if a.sign == 0:
        return EQ
    # Compare magnitudes, then flip for negative values.
    if a.height != b.height:
        mag = LT if a.height < b.height else GT
    elif abs(a.mantissa - b.mantissa) <= MANTISSA_TOL:
        mag = EQ
    else:
        mag = LT if a.mantissa < b.mantissa else GT
    return mag if a.sign > 0 else -mag


def tower_le(a: TowerReal, b: TowerReal) -> bool:
    return tower_cmp(a, b) != GT


def tower_lt(a: TowerReal, b: TowerReal) -> bool:
    return tower_cmp(a, b) == LT


def tower_max(a: TowerReal, b: TowerReal) -> TowerReal:
    return b if tower_cmp(a, b) == LT else a


def _absorb(t: TowerReal, rel_bound: float) -> TowerReal:
    return replace(t, absorbed=True,
                   absorption_bound=max(t.absorption_bound, rel_bound))


def tower_add_log(t: TowerReal, c: float) -> TowerReal:
    """value(t) + c, for positive t and an ordinary float c.

    When the value no longer fits in a double the constant is provably
    below representation granularity and is absorbed; the relative error
    bound is recorded on the result.
    """
    if t.sign <= 0:
        raise TowerError("tower_add_log needs a positive tower")
    if not math.isfinite(c):
        raise TowerError(f"non-finite constant {c!r}")
    v = to_float(t)
    if v is not None:
        s = v + c
        if s == 0.0:
            return ZERO
        if math.isfinite(s):
            out = tower_from_real(s)
            return replace(out, absorbed=t.absorbed,
                           absorption_bound=t.absorption_bound)
        # v + c overflows the double even though v fits: finish in logs.
        return tower_exp(tower_from_real(math.log(v) + math.log1p(c / v)))
    # value(t) > exp(709); |c| <= 1.8e308 < exp(710).
    return _absorb(t, abs(c) * math.exp(-_EXP_MAX))


def tower_scale(t: TowerReal, k: float) -> TowerReal:
    """value(t) * k for a positive finite factor k."""
    if not (math.isfinite(k) and k > 0.0):
        raise TowerError(f"scale factor must be positive finite, got {k!r}")
    if t.sign == 0:
        return ZERO
    v = to_float(t)
    if v is not None:
        p = v * k
        if math.isfinite(p):
            return tower_from_real(p)
    # Huge magnitude: multiply in log coordinates.
    mag = TowerReal(1, t.height, t.mantissa)
    out = tower_exp(tower_add_log(tower_log(mag), math.log(k)))
    if t.sign < 0:
        out = replace(out, sign=-1)
    return out


def tower_add(a: TowerReal, b: TowerReal) -> TowerReal:
    """General addition; exact while both operands fit in doubles,
    dominant-term with a recorded bound beyond that."""
    va, vb = to_float(a), to_float(b)
    if va is not None and vb is not None:
        s = va + vb
        if math.isfinite(s):
            return tower_from_real(s)
    if a.sign == 0:
        return b
    if b.sign == 0:
        return a
    # At least one operand exceeds float range.
    big, small = (a, b) if tower_cmp(_mag(a), _mag(b)) != LT else (b, a)
    if big.sign > 0 and small.sign > 0:
        la, lb = log_to_float(_mag(big)), log_to_float(_mag(small))
        if la is not None and lb is not None and la - lb < _EXP_MAX:
            # log(big + small) = log(big) + log1p(small/big)
            return tower_exp(tower_add_log(tower_log(big),
                                           math.log1p(math.exp(lb - la))))
    rel = _relative_gap(big, small)
    return _absorb(big, rel)


def _mag(t: TowerReal) -> TowerReal:
    return TowerReal(1, t.height, t.mantissa) if t.sign != 0 else ZERO


def _relative_gap(big: TowerReal, small: TowerReal) -> float:
    try:
        la = log_to_float(_mag(big))
        lb = log_to_float(_mag(small))
    except TowerError:
        return 1.0
    if la is None:
        return math.exp(-_EXP_MAX)
    if lb is None or lb - la > 0:
        return 1.0
    return math.exp(max(lb - la, -_EXP_MAX))


@dataclass(frozen=True)
class BoundPair:
    """Certified enclosure lo <= value <= hi in tower scalars."""

    lo: TowerReal
    hi: TowerReal

    def __post_init__(self):
        if tower_cmp(self.lo, self.hi) == GT:
            raise TowerError(f"inverted bound pair {self.lo} > {self.hi}")

    def widened(self, rel: float) -> "BoundPair":
        """Widen both ends by a relative factor (used after absorptions)."""
        return BoundPair(tower_scale(self.lo, 1.0 / (1.0 + rel)),
                         tower_scale(self.hi, 1.0 + rel))


def tower_to_json(t: TowerReal) -> dict:
    return {"sign": t.sign, "height": t.height, "mantissa": t.mantissa}


def tower_from_json(d: dict) -> TowerReal:
    return normalize(TowerReal(int(d["sign"]), int(d["height"]),
                               float(d["mantissa"])))
