"""Command-line surface: orbit runs, grid renders, hair traces, and the
inequality verifiers, each emitting versioned JSON/CSV/PNG artifacts.

Every subcommand is a pure function of its flags and input files, so
repeated runs produce byte-identical outputs.  Exit codes: 0 success,
1 a verification failed (some inequality did not hold), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import families as fam
from . import hairtrace, logmodel, orbits
from . import tract as tractmod
from .towers import to_float, tower_to_json

VERSION = 1


def parse_complex(s: str) -> complex:
    """Decimal complex literals of the form a+bi, a-bi, a, or bi."""
    t = s.strip().replace("i", "j")
    try:
        return complex(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {s!r}")


def _family_from_args(args) -> fam.FunctionFamily:
    lam = args.lam
    if args.family == "exp":
        return fam.exp_family(lam)
    if args.family == "fatou":
        return fam.fatou_map(lam)
    if args.family == "affine":
        return fam.affine_exp(args.m, lam)
    return fam.star_map(lam, args.m)


def _add_family_flags(p):
    p.add_argument("--family", choices=["exp", "fatou", "affine", "star"],
                   default="exp")
    p.add_argument("--lambda", dest="lam", type=parse_complex,
                   required=True)
    p.add_argument("--m", type=int, default=1)


def _write_json(path, payload):
    payload = dict(payload)
    payload["version"] = VERSION
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _num(x):
    """JSON form of a float / tower magnitude."""
    if isinstance(x, (int, float)):
        return x
    f = to_float(x)
    return f if f is not None else {"tower": tower_to_json(x)}


def _step_json(step):
    if step.kind == "plain":
        return {"kind": "plain", "re": step.z.real, "im": step.z.imag}
    if step.kind == "log":
        return {"kind": "log", "log_re": step.z.real,
                "log_im": step.z.imag, "tract": step.tract}
    return {"kind": "tower", "log_re": {"tower": tower_to_json(step.re)}}


def _fast_json(level):
    if isinstance(level, int):
        return level
    if isinstance(level, tuple):
        return {"refuted_up_to": level[1]}
    return None


# ---------------------------------------------------------------------------
# Rendering

PALETTE = {"indeterminate": (128, 128, 128),
           "not-escaped": (20, 20, 70),
           "escaping": (230, 150, 40),
           "fast": (200, 30, 30)}


@dataclass(frozen=True)
class RenderJob:
    family: fam.FunctionFamily
    window: tuple               # (re_min, re_max, im_min, im_max)
    pixels: tuple               # (width, height)
    horizon: int
    R: float
    L_max: int
    palette: dict = field(default_factory=lambda: dict(PALETTE))

    def __post_init__(self):
        a, b, c, d = self.window
        if not (a < b and c < d):
            raise ValueError("degenerate render window")
        w, h = self.pixels
        if not (0 < w <= 16384 and 0 < h <= 16384):
            raise ValueError("pixel counts must be in 1..16384")


def _pixel_verdict(family, z, horizon, R, L_max, mm):
    orbit = orbits.run_orbit(family, z, horizon)
    if orbit.status != orbits.STATUS_OK:
        return "indeterminate", None, None
    v = orbits.classify(orbit, R, L_max, max_mod_seq=mm)
    zip_last = v.zip_rate[-1][1] if v.zip_rate else 0.0
    if v.escaping != orbits.ESCAPE_CERTIFIED:
        return "not-escaped", None, zip_last
    if v.fast_certified():
        return "fast", v.fast_level, zip_last
    return "escaping", None, zip_last


def _render_row(job_tuple):
    family, window, pixels, horizon, R, L_max, mm, y = job_tuple
    re_min, re_max, im_min, im_max = window
    w, h = pixels
    im = im_max - (y + 0.5) * (im_max - im_min) / h
    out = []
    for x in range(w):
        re = re_min + (x + 0.5) * (re_max - re_min) / w
        verdict, level, zip_last = _pixel_verdict(family, complex(re, im),
                                                  horizon, R, L_max, mm)
        out.append((x, y, verdict, level, zip_last))
    return out


def _thread_cap() -> int:
    env = os.environ.get("HAIRLAB_THREADS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def render_grid(job: RenderJob):
    """Classify every pixel center; rows of (x, y, verdict, fast_level,
    zip_last), row-parallel up to the HAIRLAB_THREADS cap."""
    w, h = job.pixels
    mm = fam.iterated_max_modulus(job.family, job.R, job.horizon)
    tasks = [(job.family, job.window, job.pixels, job.horizon, job.R,
              job.L_max, mm, y) for y in range(h)]
    workers = min(_thread_cap(), h)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_render_row, tasks, chunksize=4))
    else:
        rows = [_render_row(t) for t in tasks]
    return [cell for row in rows for cell in row]


def _render_image(job: RenderJob, cells):
    from PIL import Image

    w, h = job.pixels
    img = Image.new("RGB", (w, h))
    px = img.load()
    for x, y, verdict, level, _ in cells:
        r, g, b = job.palette[verdict]
        if verdict == "fast" and level:
            g = min(255, g + 40 * min(level, 5))
        px[x, y] = (r, g, b)
    return img


def _write_cells_csv(path, cells):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "verdict", "fast_level"])
        for x, y, verdict, level, _ in cells:
            writer.writerow([x, y, verdict, "" if level is None else level])


# ---------------------------------------------------------------------------
# Subcommand handlers (each returns the process exit code)


def _cmd_orbit(args) -> int:
    family = _family_from_args(args)
    orbit = orbits.run_orbit(family, args.z0, args.horizon)
    _write_json(args.out, {
        "family": family.label(), "z0": [args.z0.real, args.z0.imag],
        "horizon": args.horizon, "status": orbit.status,
        "lift_index": orbit.lift_index,
        "steps": [_step_json(s) for s in orbit.steps]})
    return 0


def _cmd_classify(args) -> int:
    family = _family_from_args(args)
    orbit = orbits.run_orbit(family, args.z0, args.horizon)
    verdict = orbits.classify(orbit, args.R, args.L_max)
    _write_json(args.out, {
        "family": family.label(), "z0": [args.z0.real, args.z0.imag],
        "horizon": args.horizon, "status": orbit.status,
        "R": verdict.R_used, "escaping": verdict.escaping,
        "zip_rate": [[n, r if math.isfinite(r) else "inf"]
                     for n, r in verdict.zip_rate],
        "fast_level": _fast_json(verdict.fast_level)})
    return 0


def _cmd_render(args) -> int:
    family = _family_from_args(args)
    job = RenderJob(family, tuple(args.window), tuple(args.pixels),
                    args.horizon, args.R, args.L_max)
    cells = render_grid(job)
    _render_image(job, cells).save(args.out, format="PNG")
    if args.csv:
        _write_cells_csv(args.csv, cells)
    # nesting contract: fast-certified pixels must be escape-certified
    bad = [c for c in cells if c[2] == "fast" and c[3] is None]
    return 1 if bad else 0


def _cmd_hair(args) -> int:
    family = fam.exp_family(args.lam)
    address = logmodel.Address(tuple(args.prefix), tuple(args.tail))
    trace = hairtrace.trace_hair(family, address, (args.t_lo, args.t_hi),
                                 args.points, args.tol)
    report = hairtrace.certify_hair_fast(trace, args.R, args.horizon,
                                         args.L_max)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "re", "im", "fast_level"])
        for row, z in zip(report["rows"], trace.points):
            level = row["fast_level"]
            writer.writerow([f"{row['t']:.17g}", f"{z.real:.17g}",
                             f"{z.imag:.17g}",
                             "" if level is None else level])
    if args.report:
        _write_json(args.report, {
            "family": family.label(), "address": address.label(),
            "tolerance": args.tol, "R": args.R,
            "horizon": args.horizon, "L_max": args.L_max,
            "endpoint": [trace.endpoint.real, trace.endpoint.imag],
            "t_min": report["t_min"],
            "interior_count": report["interior_count"],
            "max_level": report["max_level"],
            "all_certified": report["all_certified"]})
    return 0 if report["all_certified"] else 1


def _cmd_headstart(args) -> int:
    model = logmodel.explicit_exp_model(args.lam)
    result = hairtrace.head_start_order(model, args.w, args.zeta,
                                        args.K, args.M, args.N_max)
    if result == "undecided":
        payload = {"leader": None, "undecided": True}
    else:
        wit = result["witness"]
        payload = {"leader": result["leader"], "undecided": False,
                   "witness": {"K": wit.K, "M": wit.M, "N": wit.N,
                               "leader": [wit.leader.real, wit.leader.imag],
                               "trailer": [wit.trailer.real,
                                           wit.trailer.imag]}}
    _write_json(args.out, payload)
    return 0


def _cmd_maxmod(args) -> int:
    family = _family_from_args(args)
    ladder = fam.iterated_max_modulus(family, args.r, args.n)
    _write_json(args.out, {
        "family": family.label(), "r": args.r, "n": args.n,
        "ladder": [_num(v) for v in ladder]})
    return 0


def _cmd_semiconj(args) -> int:
    if args.kind == "fatou":
        f = fam.fatou_map(args.lam)
        g = fam.star_map(args.lam, 1)
    else:
        f = fam.affine_exp(args.m, args.lam)
        g = fam.star_map(args.lam, args.m)
    report = fam.check_semiconjugacy(f, g, samples=args.samples)
    ok = report.max_residual < args.tol
    _write_json(args.out, {
        "family": f.label(), "target": g.label(),
        "samples": report.samples, "seed": report.seed,
        "max_residual": report.max_residual, "tolerance": args.tol,
        "holds": ok})
    return 0 if ok else 1


def _cmd_tract_build(args) -> int:
    plan = tractmod.build_sequences(args.deltas, args.etas, args.thetas,
                                    args.stages, args.quad_tol)
    _write_json(args.out, tractmod.plan_to_json(plan))
    ok = all(all(v) for v in plan.certified.values())
    return 0 if ok else 1


def _cmd_tract_verify(args) -> int:
    with open(args.plan) as fh:
        plan = tractmod.plan_from_json(json.load(fh))
    report = tractmod.verify_plan(plan, horizon=args.horizon)
    if args.out:
        _write_json(args.out, report)
    return 0 if report["passed"] else 1


def _cmd_ahlfors(args) -> int:
    if args.plan:
        with open(args.plan) as fh:
            plan = tractmod.plan_from_json(json.load(fh))
        tract = tractmod.plan_tract(plan)
    else:
        tract = tractmod.StripTract(math.pi, left=None)
    report = tractmod.verify_ahlfors(tract, args.a, args.b)
    _write_json(args.out, report)
    return 0 if report["verdict"] == "pass" else 1


def _cmd_omega(args) -> int:
    R = logmodel.omega_domination_radius(args.epsilon, args.delta, args.r)
    holds = logmodel.verify_omega_domination(args.epsilon, args.delta,
                                             args.r, R, args.n_max)
    _write_json(args.out, {
        "epsilon": args.epsilon, "delta": args.delta, "r": args.r,
        "R": R, "n_max": args.n_max, "holds": holds})
    return 0 if holds else 1


# ---------------------------------------------------------------------------
# Argument parsing


def _int_list(s: str):
    return [int(v) for v in s.split(",") if v != ""]


def _float_list(s: str):
    return [float(v) for v in s.split(",")]


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="hairlab",
        description="escape classification, hair tracing, and tract "
                    "certification for exponential-type maps")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("orbit", help="iterate one orbit")
    _add_family_flags(p)
    p.add_argument("--z0", type=parse_complex, required=True)
    p.add_argument("--horizon", type=int, default=15)
    p.add_argument("--out", default="-")
    p.set_defaults(run=_cmd_orbit)

    p = sub.add_parser("classify", help="bounded-horizon escape verdict")
    _add_family_flags(p)
    p.add_argument("--z0", type=parse_complex, required=True)
    p.add_argument("--horizon", type=int, default=15)
    p.add_argument("--R", type=float, default=5.0)
    p.add_argument("--L-max", type=int, default=4)
    p.add_argument("--out", default="-")
    p.set_defaults(run=_cmd_classify)

    p = sub.add_parser("render", help="classify a pixel grid")
    _add_family_flags(p)
    p.add_argument("--window", type=_float_list, required=True,
                   metavar="REMIN,REMAX,IMMIN,IMMAX")
    p.add_argument("--pixels", type=_int_list, required=True,
                   metavar="WIDTH,HEIGHT")
    p.add_argument("--horizon", type=int, default=40)
    p.add_argument("--R", type=float, default=5.0)
    p.add_argument("--L-max", type=int, default=4)
    p.add_argument("--out", required=True, help="PNG path")
    p.add_argument("--csv", default=None, help="per-pixel verdict table")
    p.set_defaults(run=_cmd_render)

    p = sub.add_parser("hair", help="trace a hair and certify fast escape")
    p.add_argument("--lambda", dest="lam", type=parse_complex,
                   required=True)
    p.add_argument("--prefix", type=_int_list, default=[])
    p.add_argument("--tail", type=_int_list, default=[0])
    p.add_argument("--t-lo", type=float, default=0.0)
    p.add_argument("--t-hi", type=float, default=2.0)
    p.add_argument("--points", type=int, default=64)
    p.add_argument("--tol", type=float, default=1e-2)
    p.add_argument("--R", type=float, default=5.0)
    p.add_argument("--horizon", type=int, default=15)
    p.add_argument("--L-max", type=int, default=4)
    p.add_argument("--out", required=True, help="CSV path")
    p.add_argument("--report", default=None, help="JSON summary path")
    p.set_defaults(run=_cmd_hair)

    p = sub.add_parser("headstart", help="linear head-start ordering")
    p.add_argument("--lambda", dest="lam", type=parse_complex,
                   required=True)
    p.add_argument("--w", type=parse_complex, required=True)
    p.add_argument("--zeta", type=parse_complex, required=True)
    p.add_argument("--K", type=float, default=2.0)
    p.add_argument("--M", type=float, default=1.0)
    p.add_argument("--N-max", type=int, default=20)
    p.add_argument("--out", default="-")
    p.set_defaults(run=_cmd_headstart)

    p = sub.add_parser("maxmod", help="iterated maximum modulus ladder")
    _add_family_flags(p)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--out", default="-")
    p.set_defaults(run=_cmd_maxmod)

    p = sub.add_parser("semiconj", help="exp(-z) semiconjugacy residual")
    p.add_argument("--kind", choices=["fatou", "affine"], required=True)
    p.add_argument("--lambda", dest="lam", type=parse_complex,
                   required=True)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", default="-")
    p.set_defaults(run=_cmd_semiconj)

    p = sub.add_parser("tract", help="slow-escape tract plans")
    tsub = p.add_subparsers(dest="tract_command", required=True)
    pb = tsub.add_parser("build", help="construct and certify a plan")
    pb.add_argument("--deltas", type=_float_list, default=[1.0])
    pb.add_argument("--etas", type=_float_list, default=[1.0])
    pb.add_argument("--thetas", type=_float_list, default=[1.0])
    pb.add_argument("--stages", type=int, default=2)
    pb.add_argument("--quad-tol", type=float, default=1e-6)
    pb.add_argument("--out", required=True)
    pb.set_defaults(run=_cmd_tract_build)
    pv = tsub.add_parser("verify", help="re-check a stored plan")
    pv.add_argument("plan")
    pv.add_argument("--horizon", type=int, default=6)
    pv.add_argument("--out", default=None)
    pv.set_defaults(run=_cmd_tract_verify)

    p = sub.add_parser("ahlfors", help="growth across a long rectangle")
    p.add_argument("--plan", default=None,
                   help="plan JSON; omitted = exact strip model")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(run=_cmd_ahlfors)

    p = sub.add_parser("omega", help="two-rate domination radius")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--n-max", type=int, default=12)
    p.add_argument("--out", default="-")
    p.set_defaults(run=_cmd_omega)

    return top


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.run(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
