"""Render escape-speed classifications of f(z) = 0.2 e^z on a grid.

Each pixel center is iterated to the horizon and classified against the
iterated maximum modulus ladder: not escaped, escaping, or fast with a
certified head-start level.  Orbits whose imaginary parts outgrow float
resolution are reported as indeterminate rather than guessed.

Run:  python3 demos/escape_render_demo.py [out.png]
"""

import collections
import sys

from hairlab import cli
from hairlab import families as fam

out = sys.argv[1] if len(sys.argv) > 1 else "escape_render.png"

job = cli.RenderJob(family=fam.exp_family(0.2),
                    window=(-2.0, 8.0, -4.0, 4.0),
                    pixels=(120, 96), horizon=40, R=5.0, L_max=4)
cells = cli.render_grid(job)

counts = collections.Counter(c[2] for c in cells)
print("pixel verdicts:")
for verdict, n in sorted(counts.items()):
    print(f"  {verdict:<14} {n:6d}  ({100.0 * n / len(cells):5.1f}%)")

levels = collections.Counter(c[3] for c in cells if c[2] == "fast")
if levels:
    print("fast head-start levels:", dict(sorted(levels.items())))

cli._render_image(job, cells).save(out, format="PNG")
print(f"wrote {out}")
