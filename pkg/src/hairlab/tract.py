"""Rectilinear slow-escape tract: geometry, hyperbolic-density bound
functions, cross-cut combinatorics, and the inductive sequence plan
whose real axis escapes as slowly as the plan certifies.

The tract lives in {u > left, |v| < pi}.  Writing V = pi/3:

  * corridors (r_{k-1}+1, r_k) carry walls at |v| = V, splitting them
    into a center channel and two side channels;
  * at u = r_k a vertical gate barrier blocks V >= |v| >= eps_k, so the
    center channel pinches to a gap of half-width eps_k while the side
    channels pass freely;
  * chambers (r_k, r_k+1) are unobstructed;
  * at u = r_k + 1 a wall blocks |v| >= V, so only the center channel
    continues and the side channels of the next corridor are reachable
    only from their right ends (they are gulf pockets).

F denotes the conformal map of the tract onto a half-plane normalised
along the real axis; it has no closed form, and every inequality about
it is replaced by bounds through the hyperbolic density estimates
1/(2 dist) <= rho <= 2/dist integrated along [1, u]:

    b(u) = exp(I(u)/2) <= F(u) <= exp(2 I(u)) = B(u),
    I(u) = integral of 1/dist(t, boundary) over [1, u].
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import bignum as bn
from .towers import (BoundPair, GT, LT, TowerReal, to_float,
                     tower_cmp, tower_exp, tower_from_real, tower_to_json)

PI = math.pi
V_WALL = PI / 3.0
SLOPE = 3.0 / PI          # 1/dist with dist = pi/3, the corridor baseline
GEO_LIMIT = 1e8           # largest r_k whose geometry is quadrature-checked


# ---------------------------------------------------------------------------
# Tract geometry


class StripTract:
    """Control geometry: straight strip |v| < half_width, optional left
    wall at u = left.  No gates, no gulfs."""

    def __init__(self, half_width: float, left: float | None = 0.5):
        if not 0 < half_width <= PI:
            raise ValueError("half width in (0, pi] required")
        self.half_width = half_width
        self.left = left
        self.r = []
        self.eps = []

    @property
    def base_point(self) -> complex:
        return complex(self.left if self.left is not None else 0.0, 0.0)

    def membership(self, u: float, v: float) -> bool:
        if self.left is not None and u <= self.left:
            return False
        return abs(v) < self.half_width

    def axis_distance(self, t: float) -> float:
        d = self.half_width
        if self.left is not None:
            d = min(d, t - self.left)
        return d

    def boundary_segments(self, u_lo: float, u_hi: float):
        segs = [(u_lo, self.half_width, u_hi, self.half_width),
                (u_lo, -self.half_width, u_hi, -self.half_width)]
        if self.left is not None and u_lo <= self.left <= u_hi:
            segs.append((self.left, -self.half_width,
                         self.left, self.half_width))
        return segs


class RectTract:
    """The gated tract described in the module docstring."""

    def __init__(self, r, eps, left: float = 0.5):
        r = [float(x) for x in r]
        eps = [float(e) for e in eps]
        if len(r) != len(eps):
            raise ValueError("need one eps per gate")
        prev = 1.0
        for k, rk in enumerate(r):
            if rk <= prev + (0.0 if k == 0 else 1.0):
                raise ValueError("need r_0 > 1 and r_k > r_{k-1} + 1")
            prev = rk
        for e in eps:
            if not 0.0 < e < V_WALL:
                raise ValueError("gate half-widths must lie in (0, pi/3)")
        self.r = r
        self.eps = eps
        self.left = left

    @property
    def base_point(self) -> complex:
        return complex(self.left, 0.0)

    def membership(self, u: float, v: float) -> bool:
        """Exact region rules (center/side channels, gates, walls)."""
        if not (u > self.left and abs(v) < PI):
            return False
        for rk, ek in zip(self.r, self.eps):
            if u == rk:
                return abs(v) > V_WALL or abs(v) < ek
            if u == rk + 1.0:
                return abs(v) < V_WALL
            if rk < u < rk + 1.0:
                return True
        return abs(v) != V_WALL

    def columns(self):
        """Vertical slabs: alternating corridor / chamber, ending in an
        unbounded corridor."""
        cols = []
        prev = self.left
        for rk in self.r:
            cols.append((prev, rk, "corridor"))
            cols.append((rk, rk + 1.0, "chamber"))
            prev = rk + 1.0
        cols.append((prev, math.inf, "corridor"))
        return cols

    def column_index(self, u: float) -> int:
        for j, (lo, hi, _) in enumerate(self.columns()):
            if lo < u < hi:
                return j
        raise ValueError(f"u = {u} lies on a column boundary or outside")

    def boundary_segments(self, u_lo: float, u_hi: float):
        """Boundary pieces as (x1, y1, x2, y2), clipped to the window."""
        segs = [(u_lo, PI, u_hi, PI), (u_lo, -PI, u_hi, -PI)]
        if u_lo <= self.left <= u_hi:
            segs.append((self.left, -PI, self.left, PI))
        for lo, hi, kind in self.columns():
            if kind != "corridor":
                continue
            a, b = max(lo, u_lo), min(hi, u_hi)
            if a < b:
                segs.append((a, V_WALL, b, V_WALL))
                segs.append((a, -V_WALL, b, -V_WALL))
        for rk, ek in zip(self.r, self.eps):
            if u_lo <= rk <= u_hi:
                segs.append((rk, ek, rk, V_WALL))
                segs.append((rk, -V_WALL, rk, -ek))
            w = rk + 1.0
            if u_lo <= w <= u_hi:
                segs.append((w, V_WALL, w, PI))
                segs.append((w, -PI, w, -V_WALL))
        return segs

    def axis_distance(self, t: float) -> float:
        """Distance from (t, 0) to the boundary; specialised for the
        real axis where only a handful of features can be nearest."""
        d = min(t - self.left, PI)
        for lo, hi, kind in self.columns():
            if kind != "corridor":
                continue
            if lo <= t <= hi:
                d = min(d, V_WALL)
            elif t < lo:
                d = min(d, math.hypot(lo - t, V_WALL))
            else:
                d = min(d, math.hypot(t - hi, V_WALL))
        for rk, ek in zip(self.r, self.eps):
            d = min(d, math.hypot(t - rk, ek))
        return d


def boundary_distance(tract, w: complex) -> float:
    """Euclidean distance from an interior point to the boundary."""
    w = complex(w)
    if not tract.membership(w.real, w.imag):
        raise ValueError(f"{w} is not in the tract")
    # window half-width 4 > pi covers every possibly-nearest feature
    best = math.inf
    for x1, y1, x2, y2 in tract.boundary_segments(w.real - 4.0,
                                                  w.real + 4.0):
        best = min(best, _segment_distance(w.real, w.imag, x1, y1, x2, y2))
    return best


def _segment_distance(px, py, x1, y1, x2, y2) -> float:
    dx, dy = x2 - x1, y2 - y1
    L2 = dx * dx + dy * dy
    if L2 == 0.0:
        return math.hypot(px - x1, py - y1)
    t = max(0.0, min(1.0, ((px - x1) * dx + (py - y1) * dy) / L2))
    return math.hypot(px - (x1 + t * dx), py - (y1 + t * dy))


# ---------------------------------------------------------------------------
# Quadrature of the density integral I(u) = int_1^u dt / dist(t)


class QuadratureError(RuntimeError):
    def __init__(self, panel, value):
        super().__init__(f"quadrature failed to converge on panel "
                         f"{panel} (running value {value})")
        self.panel = panel


def _axis_breakpoints(tract, lo: float, hi: float):
    pts = {lo, hi}
    if getattr(tract, "left", None) is not None:
        c = tract.left + V_WALL
        if lo < c < hi:
            pts.add(c)
    for rk, ek in zip(tract.r, tract.eps):
        half = math.sqrt(max(V_WALL * V_WALL - ek * ek, 0.0))
        # integrand kinks where the gate tip hands over to the next wall:
        # at rk + cross against the wall segment (inside the chamber) or
        # at rk + half against the corridor wall line (past the chamber)
        cross = 0.5 * (1.0 + V_WALL * V_WALL - ek * ek)
        for x in (rk - half, rk - 1.0, rk, rk + 1.0, rk + cross,
                  rk + half):
            if lo < x < hi:
                pts.add(x)
    return sorted(pts)


def _pinch_windows(tract, u: float):
    """Per gate, the span where the nearest boundary point lies on the
    gate tip, so 1/dist integrates to an exact asinh difference.  The
    windows must be handled analytically: below float spacing around
    r_k the integrand cannot even be sampled."""
    wins = []
    for rk, ek in zip(tract.r, tract.eps):
        half = math.sqrt(max(V_WALL * V_WALL - ek * ek, 0.0))
        # right end: where the next corridor's wall becomes nearer
        reach = min(1.0, 0.5 * (1.0 + V_WALL * V_WALL - ek * ek))
        a, b = max(rk - half, 1.0), min(rk + reach, u)
        if a >= b:
            continue
        # confirm the gate term is what axis_distance returns throughout
        grid = {a, b, rk, 0.5 * (a + b)}
        s = ek
        while s < b - a:
            grid.update(x for x in (rk - s, rk + s) if a <= x <= b)
            s *= 2.0
        for x in grid:
            if not math.isclose(tract.axis_distance(x),
                                math.hypot(x - rk, ek), rel_tol=1e-9):
                raise ValueError("gates too close together for the "
                                 "axis integral")
        wins.append((a, b, rk, ek))
    for (_, b1, _, _), (a2, _, _, _) in zip(wins[:-1], wins[1:]):
        if b1 > a2:
            raise ValueError("overlapping gate windows")
    return wins


def _adaptive_simpson(f, a, b, tol, depth=40):
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth)


def _simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if abs(left + right - whole) <= 15.0 * tol or b - a < 1e-14 * abs(m):
        return left + right + (left + right - whole) / 15.0
    if depth <= 0:
        raise QuadratureError((a, b), whole)
    return (_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
            _simpson_rec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1))


def axis_log_integral(tract, u: float, quad_tol: float) -> float:
    """I(u) = int_1^u dt / dist(t, boundary): exact asinh pieces across
    each gate pinch, adaptive Simpson on the smooth complement."""
    if u < 1.0:
        raise ValueError("u >= 1 required")
    if u == 1.0:
        return 0.0
    for rk, ek in zip(tract.r, tract.eps):
        if ek == 0.0 and rk - V_WALL < u:
            raise ValueError("gate width underflows doubles; geometry "
                             "beyond the numeric horizon")
    total = 0.0
    segments = []
    cursor = 1.0
    for a, b, rk, ek in _pinch_windows(tract, u):
        total += math.asinh((b - rk) / ek) - math.asinh((a - rk) / ek)
        if cursor < a:
            segments.append((cursor, a))
        cursor = b
    if cursor < u:
        segments.append((cursor, u))
    f = lambda t: 1.0 / tract.axis_distance(t)
    for lo, hi in segments:
        pts = _axis_breakpoints(tract, lo, hi)
        for a, b in zip(pts[:-1], pts[1:]):
            est = (b - a) * 0.5 * (f(a) + f(b))
            total += _adaptive_simpson(f, a, b,
                                       0.1 * quad_tol * max(abs(est), 1e-3))
    return total


def bound_functions(tract, u: float, quad_tol: float = 1e-6) -> BoundPair:
    """Certified enclosure b(u) <= F(u) <= B(u) from the density
    integral, widened by the quadrature tolerance."""
    I = axis_log_integral(tract, u, quad_tol)
    pad = 3.0 * quad_tol * abs(I) + 1e-12
    lo = tower_exp(tower_from_real(0.5 * (I - pad)))
    hi = tower_exp(tower_from_real(2.0 * (I + pad)))
    return BoundPair(lo, hi)


# ---------------------------------------------------------------------------
# Cross-cuts, gulfs, and the rectangle graph

BANDS = ((-PI, -V_WALL), (-V_WALL, V_WALL), (V_WALL, PI))


@dataclass(frozen=True)
class CrossCut:
    a: float
    v_lo: float
    v_hi: float
    component_id: int


def _band_index(v: float) -> int:
    if v < -V_WALL:
        return 0
    if v <= V_WALL:
        return 1
    return 2


def cross_cuts(tract, a: float):
    """Maximal components of {Re w = a} intersected with the tract."""
    if isinstance(tract, StripTract):
        return [CrossCut(a, -tract.half_width, tract.half_width, 0)]
    j = tract.column_index(a)
    kind = tract.columns()[j][2]
    if kind == "chamber":
        return [CrossCut(a, -PI, PI, 0)]
    return [CrossCut(a, lo, hi, i) for i, (lo, hi) in enumerate(BANDS)]


def _graph_edges(tract):
    """Adjacency of (column, band) rectangles.  Returns (columns, edges,
    crossing) where crossing[(c, c+1)] = (x, open bands)."""
    cols = tract.columns()
    edges = []
    for c, (_, _, kind) in enumerate(cols):
        if kind == "chamber":
            edges.append(((c, 0), (c, 1)))
            edges.append(((c, 1), (c, 2)))
    crossing = {}
    for c in range(len(cols) - 1):
        x = cols[c][1]
        if cols[c][2] == "corridor":      # gate at r_k: all bands open
            bands = (0, 1, 2)
        else:                             # wall at r_k + 1: center only
            bands = (1,)
        crossing[c] = (x, bands)
        for b in bands:
            edges.append(((c, b), (c + 1, b)))
    return cols, edges, crossing


def _flood(nodes, edges, start):
    adj = {}
    for p, q in edges:
        adj.setdefault(p, []).append(q)
        adj.setdefault(q, []).append(p)
    seen = {start}
    todo = [start]
    while todo:
        cur = todo.pop()
        for nxt in adj.get(cur, ()):
            if nxt in nodes and nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return seen


def locate(tract, zeta: complex, a: float) -> CrossCut:
    """The cross-cut at Re = a that separates zeta from infinity: the
    unique one adjacent to zeta's component of {Re w < a}."""
    zeta = complex(zeta)
    if not tract.membership(zeta.real, zeta.imag):
        raise ValueError("zeta outside tract")
    if a <= zeta.real:
        raise ValueError("need a > Re zeta")
    cuts = cross_cuts(tract, a)
    if isinstance(tract, StripTract) or len(cuts) == 1:
        return cuts[0]
    j0 = tract.column_index(a)
    cols, edges, _ = _graph_edges(tract)
    start = (tract.column_index(zeta.real), _band_index(zeta.imag))
    nodes = {(c, b) for c in range(j0 + 1) for b in range(3)}
    seen = _flood(nodes, edges, start)
    bands = sorted(b for (c, b) in seen if c == j0)
    assert len(bands) == 1, "cross-cut component not unique"
    return cuts[bands[0]]


def cut_separates(tract, cut: CrossCut) -> bool:
    """Whether removing the cut disconnects the base point from the
    unbounded end, decided on the rectangle graph with the cut's column
    split at Re = a."""
    if isinstance(tract, StripTract):
        return True
    j0 = tract.column_index(cut.a)
    cols, edges, _ = _graph_edges(tract)
    kind = cols[j0][2]

    def side(node):
        c, b = node
        if c < j0:
            return (c, "L", b)
        if c > j0:
            return (c, "R", b)
        return None

    new_edges = []
    for p, q in edges:
        sp, sq = side(p), side(q)
        if sp is None and sq is None:     # vertical edge inside column j0
            new_edges.append(((j0, "L", p[1]), (j0, "L", q[1])))
            new_edges.append(((j0, "R", p[1]), (j0, "R", q[1])))
        elif sp is None or sq is None:
            other, split = (sq, p) if sp is None else (sp, q)
            half = "L" if other[0] < j0 else "R"
            new_edges.append((other, (j0, half, split[1])))
        else:
            new_edges.append((sp, sq))
    if kind == "corridor":
        for b in range(3):
            if b != cut.component_id:
                new_edges.append(((j0, "L", b), (j0, "R", b)))
    # chamber cuts span the full width: no crossing survives removal
    nodes = {n for e in new_edges for n in e}
    # base point sits in column 0, center band, left of the cut
    start = (0, "L", 1)
    nodes.add(start)
    last = len(cols) - 1
    targets = {(last, "R", b) for b in range(3)}
    seen = _flood(nodes, new_edges, start)
    return not (seen & targets)


def gulf_witness(tract, zeta: complex, a_max: float,
                 step: float = 0.25) -> dict:
    """Search for a cross-cut through zeta that fails to separate the
    base point from infinity (a gulf certificate)."""
    zeta = complex(zeta)
    p = tract.base_point
    if not tract.membership(zeta.real, zeta.imag):
        raise ValueError("zeta outside tract")
    a = zeta.real + step
    while a <= a_max:
        try:
            cut = locate(tract, zeta, a)
        except ValueError:
            a += step * 0.13 + step
            continue
        if not cut_separates(tract, cut):
            return {"found": True, "a": a, "cut": cut}
        a += step
    return {"found": False, "a": None, "cut": None}


def verify_crosscut_stability(tract, A: float, D_candidates) -> dict:
    """For each D, check that every point at Re = A yields the same
    cross-cut at a = D * A as the base point does."""
    p = tract.base_point
    if A <= max(p.real, 1.0):
        raise ValueError("need A > max(Re p, 1)")
    vs = np.arange(-PI + PI / 48, PI, PI / 24)
    zetas = [complex(A, v) for v in vs if tract.membership(A, v)]
    probe = complex(p.real + 0.05, 0.0)
    results = []
    passing = None
    for D in D_candidates:
        a = D * A
        try:
            ref = locate(tract, probe, a)
            ok = all(locate(tract, z, a).component_id == ref.component_id
                     for z in zetas)
        except (ValueError, AssertionError):
            ok = False
        results.append({"D": D, "a": a, "stable": ok})
        if ok and passing is None:
            passing = D
    return {"A": A, "results": results, "smallest_passing_D": passing}


def slope_constants(tract, samples: int = 10_000, seed: int = 7):
    """(alpha, beta) = (1, 2 pi): any subset of |v| < pi has imaginary
    spread under 2 pi.  The inequality is sampled as a sanity check."""
    rng = np.random.default_rng(seed)
    alpha, beta = 1.0, 2.0 * PI
    pts = []
    lo = tract.left if getattr(tract, "left", None) is not None else 0.0
    while len(pts) < samples:
        u = rng.uniform(lo + 1e-6, lo + 60.0)
        v = rng.uniform(-PI, PI)
        if tract.membership(u, v):
            pts.append((u, v))
    for i in range(0, samples - 1, 2):
        (u1, v1), (u2, v2) = pts[i], pts[i + 1]
        assert abs(v1 - v2) <= alpha * max(u1, u2, 0.0) + beta
    return alpha, beta


def backtrack_depth(tract, w0: complex) -> float:
    """How far left of Re w0 any path to infinity must dip, computed as
    a widest-path problem on the rectangle graph (0 when a monotone
    rightward path exists)."""
    w0 = complex(w0)
    if not tract.membership(w0.real, w0.imag):
        raise ValueError("w0 outside tract")
    if isinstance(tract, StripTract):
        return 0.0
    cols, edges, crossing = _graph_edges(tract)
    start = (tract.column_index(w0.real), _band_index(w0.imag))
    best = {start: w0.real}
    changed = True
    cross_x = {}
    for c, (x, bands) in crossing.items():
        for b in bands:
            cross_x[frozenset({(c, b), (c + 1, b)})] = x
    while changed:
        changed = False
        for p, q in edges:
            x = cross_x.get(frozenset({p, q}), math.inf)
            for a, bnode in ((p, q), (q, p)):
                if a in best:
                    cand = min(best[a], x)
                    if cand > best.get(bnode, -math.inf):
                        best[bnode] = cand
                        changed = True
    last = len(cols) - 1
    reach = max((best.get((last, b), -math.inf) for b in range(3)),
                default=-math.inf)
    if reach == -math.inf:
        raise RuntimeError("unbounded rectangle unreachable")
    return max(0.0, w0.real - reach)


# ---------------------------------------------------------------------------
# Ahlfors-type growth check


def verify_ahlfors(tract, a: float, b: float,
                   quad_tol: float = 1e-6) -> dict:
    """Growth of |F| between Re = a and Re = b: must beat
    exp((b - a)/2 - 4 pi) when b > a + 4 pi.

    For the exact strip {|Im w| < pi} the map e^(w/2) gives the true
    ratio exp((b - a)/2).  For gated tracts the bound-based ratio
    b(b)/B(a) yields a conclusive pass or an honest 'inconclusive'.
    """
    if b <= a + 4.0 * PI:
        raise ValueError("need b > a + 4 pi")
    need_log = 0.5 * (b - a) - 4.0 * PI
    if isinstance(tract, StripTract) and tract.left is None \
            and tract.half_width == PI:
        ratio_log = 0.5 * (b - a)
        return {"name": "ahlfors-strip", "lhs_lo": ratio_log,
                "lhs_hi": ratio_log, "rhs_lo": need_log,
                "rhs_hi": need_log, "verdict": "pass",
                "scale": "log-ratio"}
    if a < 1.0:
        raise ValueError("bound-based check needs a >= 1")
    I_b = axis_log_integral(tract, b, quad_tol)
    I_a = axis_log_integral(tract, a, quad_tol)
    pad = 3.0 * quad_tol * (abs(I_a) + abs(I_b)) + 1e-12
    ratio_log_lo = 0.5 * (I_b - pad) - 2.0 * (I_a + pad)
    verdict = "pass" if ratio_log_lo >= need_log else "inconclusive"
    return {"name": "ahlfors-bounds", "lhs_lo": ratio_log_lo,
            "lhs_hi": math.inf, "rhs_lo": need_log, "rhs_hi": need_log,
            "verdict": verdict, "scale": "log-ratio"}


# ---------------------------------------------------------------------------
# Inductive sequence plan

LN_FLOAT_KEEP = math.log(1e15)   # values above stay structural (Exp)


@dataclass
class SequencePlan:
    """Certified data (r_k, eps_k, u_k) for the slow tract.

    Entries are floats while small and structural Exp scalars beyond
    1e15; neg_log_eps[k] holds -ln eps_k (always positive).  The first
    `geometric_stages` gates have float geometry verified by quadrature;
    later gates exist only through the linear-in-u integral formulas
    anchored at `anchor` = last geometric r + 1.
    """

    deltas: list
    etas: list
    thetas: list
    quad_tol: float
    r: list
    u: list
    neg_log_eps: list
    geometric_stages: int = 0
    anchor: float | None = None
    I_lo_anchor: float = 0.0
    I_up_anchor: float = 0.0
    certified: dict = field(default_factory=lambda: {"A": [], "B": [],
                                                     "C": []})
    extended_from: int | None = None

    @property
    def stages(self) -> int:
        return len(self.neg_log_eps)


def plan_tract(plan: SequencePlan) -> RectTract:
    """The float-geometry prefix of the plan's tract."""
    g = plan.geometric_stages
    if g == 0:
        return RectTract([], [])
    return RectTract([float(x) for x in plan.r[:g]],
                     [math.exp(-float(plan.neg_log_eps[k]))
                      for k in range(g)])


def _exp_big(x):
    """exp(x) as a float when comfortably small, else structural."""
    if not bn.is_exp(x) and x <= LN_FLOAT_KEEP:
        return math.exp(x)
    return bn.Exp(x, 0.0)


def _num_I(tract, u: float, quad_tol: float, upper: bool,
           widen: float = 1.0) -> float:
    I = axis_log_integral(tract, u, quad_tol)
    pad = widen * (3.0 * quad_tol * abs(I) + 1e-12)
    return I + pad if upper else I - pad


def _plan_I(plan: SequencePlan, u, upper: bool):
    """Linear symbolic integral formula, valid for u >= anchor: corridor
    baseline through the anchor plus bracketed gate spike terms.  The
    +-1 constant covers partially traversed gate windows and the +-10
    brackets the asinh spike profile around 2 (-ln eps)."""
    base = plan.I_up_anchor if upper else plan.I_lo_anchor
    const = base - SLOPE * plan.anchor + (1.0 if upper else -1.0)
    terms = [bn.b_scale(u, SLOPE), const]
    for j in range(plan.geometric_stages, len(plan.neg_log_eps)):
        if bn.b_cmp(plan.r[j], u) < 0:
            terms.append(bn.b_add_small(bn.b_scale(plan.neg_log_eps[j], 2.0),
                                        10.0 if upper else -10.0))
    return bn.b_sum(*terms)


def _I_bound(plan: SequencePlan, u, upper: bool, widen: float = 1.0):
    """Shared integral rule so that build and verify take bitwise
    identical paths: numeric below the anchor, symbolic above."""
    if not bn.is_exp(u) and plan.anchor is not None and u <= plan.anchor:
        return _num_I(plan_tract(plan), float(u), plan.quad_tol, upper,
                      widen)
    return _plan_I(plan, u, upper)


def _B_of(plan: SequencePlan, u, widen: float = 1.0):
    return _exp_big(bn.b_scale(_I_bound(plan, u, True, widen), 2.0))


def _broadcast(x, n: int):
    try:
        xs = [float(v) for v in x]
    except TypeError:
        xs = [float(x)]
    while len(xs) < n:
        xs.append(xs[-1])
    if len(xs) != n or any(v <= 0 for v in xs):
        raise ValueError("margin sequences must be positive, length "
                         "<= stages + 1")
    return xs


def build_sequences(deltas, etas, thetas, stages: int,
                    quad_tol: float = 1e-6) -> SequencePlan:
    """Construct the slow-tract sequences inductively.

    Stage k places the gate half-width eps_k so the growth through
    chamber k beats e^(12 r_k) (u_{k+1} + theta_k), then sets
    r_{k+1} = B(u_{k+1}) + 2 + delta_{k+1} and
    u_{k+1} = max(r_k + 2, B(r_k - 1) + eta_k) + 1.  The first stage(s)
    are checked by quadrature on the actual geometry; once r_k leaves
    the numeric range the construction continues in structural scalars
    through the symbolic integral formulas.
    """
    if stages < 1:
        raise ValueError("stages >= 1 required")
    deltas = _broadcast(deltas, stages + 1)
    etas = _broadcast(etas, stages + 1)
    thetas = _broadcast(thetas, stages + 1)
    plan = SequencePlan(deltas, etas, thetas, quad_tol,
                        r=[3.0 + deltas[0]], u=[1.0], neg_log_eps=[])
    for k in range(stages):
        _build_stage(plan, k)
    report = verify_plan(plan, horizon=plan.stages, quad_widen=4.0)
    plan.certified = report["certified"]
    return plan


def _build_stage(plan: SequencePlan, k: int) -> None:
    rk = plan.r[k]
    geometric = (not bn.is_exp(rk)) and float(rk) <= GEO_LIMIT \
        and plan.geometric_stages == k
    if not geometric and plan.anchor is None:
        raise ValueError("first stage must be numerically checkable")
    if geometric:
        rk = float(rk)
        prev = plan_tract(plan)
        # u_{k+1}; the +0.05 covers the unchosen gate k's partial window
        I3 = _num_I(prev, rk - 1.0, plan.quad_tol, True) + 0.05
        Bv = _exp_big(2.0 * I3)
        if bn.is_exp(Bv):
            u_next = bn.b_add_small(Bv, plan.etas[k] + 1.0)
        else:
            u_next = max(rk + 2.0, Bv + plan.etas[k]) + 1.0
        lnu = bn.b_log(u_next) if bn.is_exp(u_next) else math.log(u_next)
        if bn.is_exp(lnu):
            raise ValueError("geometric stage overflows the numeric "
                             "range; reduce delta_0")
        # ln(u + theta) <= ln u + theta for u >= 1
        C = 12.0 * rk + float(lnu) + plan.thetas[k]

        def cond(x: float) -> bool:
            e = math.exp(x)
            if e == 0.0 or e >= V_WALL:
                return False
            t = RectTract(list(prev.r) + [rk], list(prev.eps) + [e])
            return 0.5 * _num_I(t, rk + 1.0, plan.quad_tol, False) >= C

        x_hi = math.log(V_WALL) - 1e-6
        x_lo = -(2.0 * (C + 40.0) + 60.0)
        if not cond(x_lo):
            raise RuntimeError("no admissible gate width at stage "
                               f"{k}: narrowest gate still too slow")
        if cond(x_hi):
            lneps = x_hi - 2.0
        else:
            lo, hi = x_lo, x_hi
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if cond(mid):
                    lo = mid
                else:
                    hi = mid
            lneps = lo - 2.0
        assert cond(lneps), "bisection margin lost"
        plan.neg_log_eps.append(-lneps)
        plan.geometric_stages = k + 1
        # re-anchor the symbolic formulas just past the new gate
        full = plan_tract(plan)
        I_anchor = axis_log_integral(full, rk + 1.0, plan.quad_tol)
        pad = 3.0 * plan.quad_tol * abs(I_anchor) + 1e-12
        plan.anchor = rk + 1.0
        plan.I_lo_anchor = I_anchor - pad
        plan.I_up_anchor = I_anchor + pad
        r_next = bn.b_add_small(_B_of(plan, u_next),
                                2.0 + plan.deltas[k + 1])
    else:
        rk_m1 = bn.b_add_small(rk, -1.0)
        Bv = _B_of(plan, rk_m1)
        assert bn.b_cmp(Bv, bn.b_add_small(rk, 2.0)) == 1
        u_next = bn.b_add_small(Bv, plan.etas[k] + 1.0)
        # subtraction-free closed form; margin checked by verify_plan
        neg_k = bn.b_scale(bn.b_sum(bn.b_scale(rk, 12.0),
                                    bn.b_log(u_next),
                                    plan.thetas[k] + 11.0), 2.0)
        plan.neg_log_eps.append(neg_k)
        r_next = bn.b_add_small(_B_of(plan, u_next),
                                2.0 + plan.deltas[k + 1])
    plan.u.append(u_next)
    plan.r.append(r_next)


def extend_plan(plan: SequencePlan, stages: int) -> SequencePlan:
    """Continue the symbolic construction to more stages (the extension
    is formula-generated and carries no fresh geometric verification)."""
    if stages <= plan.stages:
        return plan
    ext = SequencePlan(_broadcast(plan.deltas, stages + 1),
                       _broadcast(plan.etas, stages + 1),
                       _broadcast(plan.thetas, stages + 1),
                       plan.quad_tol, list(plan.r), list(plan.u),
                       list(plan.neg_log_eps), plan.geometric_stages,
                       plan.anchor, plan.I_lo_anchor, plan.I_up_anchor,
                       dict(plan.certified), extended_from=plan.stages)
    for k in range(plan.stages, stages):
        _build_stage(ext, k)
    return ext


def _rec(records, name, lhs, rhs, want_gt: bool):
    cmp = bn.b_cmp(lhs, rhs)
    ok = cmp == (1 if want_gt else -1)
    records.append({"name": name,
                    "lhs_lo": _json_val(lhs), "lhs_hi": _json_val(lhs),
                    "rhs_lo": _json_val(rhs), "rhs_hi": _json_val(rhs),
                    "verdict": "pass" if ok else "fail"})
    return ok


def _json_val(x):
    if not bn.is_exp(x):
        return float(x)
    f = bn._float_of(x)
    if f is not None:
        return f
    return {"tower": tower_to_json(bn.to_tower(x))}


def verify_plan(plan: SequencePlan, horizon: int = 0,
                quad_widen: float = 1.0) -> dict:
    """Re-check every plan inequality and (optionally) the slow escape
    chain out to `horizon` stages.

    Geometric stages are re-checked by fresh quadrature on the stored
    geometry, so a tampered gate width fails here.  Symbolic stages are
    re-checked in structural arithmetic: shared sub-expressions cancel
    exactly and only the construction margins remain.
    """
    records = []
    ok = True
    A_flags, B_flags, C_flags = [], [], []
    g = plan.geometric_stages
    tract0 = plan_tract(plan)
    for k in range(1, plan.stages + 1):
        u_k = plan.u[k]
        B_u = _B_of(plan, u_k, widen=quad_widen)
        lo_gate = bn.b_add_small(plan.r[k - 1], 2.0)
        hi_gate = bn.b_add_small(plan.r[k], -1.0 - plan.deltas[k])
        fine = _rec(records, f"A{k}: u_{k} > r_{k-1} + 2",
                    u_k, lo_gate, True)
        fine &= _rec(records, f"A{k}: u_{k} < r_{k} - 1 - delta",
                     u_k, hi_gate, False)
        fine &= _rec(records, f"A{k}: B(u_{k}) > r_{k-1} + 2",
                     B_u, lo_gate, True)
        fine &= _rec(records, f"A{k}: B(u_{k}) < r_{k} - 1 - delta",
                     B_u, hi_gate, False)
        A_flags.append(fine)
        ok &= fine
    for k in range(plan.stages):
        BB = _B_of(plan, _B_of(plan, plan.u[k], widen=quad_widen),
                   widen=quad_widen)
        fine = _rec(records, f"B{k}: B(B(u_{k})) < u_{k+1}",
                    BB, plan.u[k + 1], False)
        B_flags.append(fine)
        ok &= fine
        # growth through chamber k
        if k < g:
            lhs = 0.5 * _num_I(tract0, float(plan.r[k]) + 1.0,
                               plan.quad_tol, False, widen=quad_widen)
            rhs = 12.0 * float(plan.r[k]) + \
                float(bn.b_log(plan.u[k + 1])
                      if bn.is_exp(plan.u[k + 1])
                      else math.log(plan.u[k + 1])) + plan.thetas[k]
        else:
            lhs = bn.b_scale(_plan_I(plan, bn.b_add_small(plan.r[k], 1.0),
                                     False), 0.5)
            rhs = bn.b_sum(bn.b_scale(plan.r[k], 12.0),
                           bn.b_add_small(bn.b_log(plan.u[k + 1]),
                                          plan.thetas[k]))
        fine = _rec(records, f"C{k}: chamber growth beats "
                    "e^(12 r) (u + theta)", lhs, rhs, True)
        C_flags.append(fine)
        ok &= fine
    chain = None
    if horizon > 0:
        ext = extend_plan(plan, horizon)
        # lower chain: F^m(1) <= B^m(1) stays pinned at the base point
        x = 1.0
        for _ in range(horizon + 4):
            x = _B_of(ext, x)
        chain_ok = True
        for n in range(1, horizon + 1):
            chain_ok &= _rec(records, f"chain: F^(n+L)(u_0) < u_{n}",
                             x, ext.u[n], False)
        # chamber growth of any auto-extended stage, checked the same way
        ext_C = list(C_flags)
        for k in range(plan.stages, horizon):
            lhs = bn.b_scale(_plan_I(ext, bn.b_add_small(ext.r[k], 1.0),
                                     False), 0.5)
            rhs = bn.b_sum(bn.b_scale(ext.r[k], 12.0),
                           bn.b_add_small(bn.b_log(ext.u[k + 1]),
                                          ext.thetas[k]))
            ext_C.append(_rec(records, f"C{k} (extension, formula-only): "
                              "chamber growth beats e^(12 r) (u + theta)",
                              lhs, rhs, True))
        upper = len(ext_C) >= horizon and all(ext_C[:horizon])
        records.append({"name": "chain: u_n < M^n(u_0, F) via certified "
                        "chamber growth", "lhs_lo": None, "lhs_hi": None,
                        "rhs_lo": None, "rhs_hi": None,
                        "verdict": "pass" if upper else "fail"})
        chain_ok &= upper
        chain = {"horizon": horizon, "ok": chain_ok,
                 "extended_stages": max(0, horizon - plan.stages)}
        ok &= chain_ok
    absorbed = any(bn.was_absorbed(v) for v in plan.r + plan.u
                   if bn.is_exp(v))
    return {"passed": bool(ok), "records": records,
            "certified": {"A": A_flags, "B": B_flags, "C": C_flags},
            "chain": chain, "absorbed_terms": absorbed}


# ---------------------------------------------------------------------------
# Plan serialization


def plan_to_json(plan: SequencePlan) -> dict:
    def num(x):
        return bn.big_to_json(x) if bn.is_exp(x) else float(x)

    def eps_entry(v):
        if bn.is_exp(v):
            return {"neg": bn.big_to_json(v)}
        return -float(v)                      # plain ln eps

    return {"version": 1,
            "r": [num(x) for x in plan.r],
            "log_eps": [eps_entry(v) for v in plan.neg_log_eps],
            "u": [num(x) for x in plan.u],
            "certified": {k: list(map(bool, v))
                          for k, v in plan.certified.items()},
            "quad_tol": plan.quad_tol,
            "deltas": plan.deltas, "etas": plan.etas,
            "thetas": plan.thetas,
            "geometric_stages": plan.geometric_stages,
            "anchor": plan.anchor,
            "I_lo_anchor": plan.I_lo_anchor,
            "I_up_anchor": plan.I_up_anchor}


def plan_from_json(d: dict) -> SequencePlan:
    if d.get("version") != 1:
        raise ValueError("unsupported plan version")

    def num(x):
        return bn.big_from_json(x) if isinstance(x, dict) else float(x)

    def eps_entry(v):
        if isinstance(v, dict):
            return bn.big_from_json(v["neg"])
        return -float(v)

    return SequencePlan(list(d["deltas"]), list(d["etas"]),
                        list(d["thetas"]), float(d["quad_tol"]),
                        [num(x) for x in d["r"]],
                        [num(x) for x in d["u"]],
                        [eps_entry(v) for v in d["log_eps"]],
                        int(d["geometric_stages"]), d["anchor"],
                        float(d["I_lo_anchor"]), float(d["I_up_anchor"]),
                        {k: list(v) for k, v in d["certified"].items()})
