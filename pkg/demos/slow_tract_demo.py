"""Build and verify a gated tract whose real axis escapes arbitrarily
slowly, then show the certificate surviving (and failing) a re-check.

The construction alternates corridors and chambers in a log-plane strip,
pinching each corridor with a gate so narrow that the conformal growth
stalls there.  Gate widths shrink at tower rate (stage 1 already needs
ln eps below -1e300), so the later stages are carried in structural
scalars where shared sub-expressions cancel exactly.

Run:  python3 demos/slow_tract_demo.py
"""

import math

from hairlab import bignum as bn
from hairlab import tract as tr


def show(x):
    if not bn.is_exp(x):
        return f"{x:.6g}"
    f = bn._float_of(x)
    if f is not None:
        return f"{f:.6g}"
    lg = bn.b_log(x)
    return f"exp({show(lg)})"


plan = tr.build_sequences(deltas=[1.0], etas=[1.0], thetas=[1.0],
                          stages=2, quad_tol=1e-6)

print("stage data (r_k = gate position, u_k = escape checkpoint):")
for k in range(plan.stages + 1):
    neg = plan.neg_log_eps[k] if k < plan.stages else None
    print(f"  k={k}  r = {show(plan.r[k]):<24} u = {show(plan.u[k]):<24}"
          + (f" -ln eps = {show(neg)}" if neg is not None else ""))

report = tr.verify_plan(plan, horizon=6)
print(f"\nverification: passed = {report['passed']}, "
      f"chain to horizon {report['chain']['horizon']} = "
      f"{report['chain']['ok']} "
      f"({report['chain']['extended_stages']} stages auto-extended "
      f"from the formulas)")
for rec in report["records"][:6]:
    print(f"  {rec['verdict']:>4}  {rec['name']}")
print(f"  ... {len(report['records'])} checks total")

# widen the first gate by a factor 1e6 and watch the certificate break
bad = tr.plan_from_json(tr.plan_to_json(plan))
bad.neg_log_eps[0] = bad.neg_log_eps[0] - math.log(1e6)
tampered = tr.verify_plan(bad)
failing = [r["name"] for r in tampered["records"]
           if r["verdict"] == "fail"]
print(f"\nafter widening gate 0 by 1e6: passed = {tampered['passed']}, "
      f"failing checks = {failing}")
