"""
Nullclines inside an invariant plane
====================================

Each factor of ``f_j`` draws one x-nullcline and each factor of ``g_j`` one
y-nullcline. The drawings are written as SVG and CSV next to this script.
"""

from __future__ import annotations

from pathlib import Path

from heteronet import build, calibrate_epsilon, sample_nullclines
from heteronet.nullclines import crossing_direction, curves_to_csv, curves_to_svg

out = Path(__file__).with_name("figures")
out.mkdir(exist_ok=True)

n, plane = 4, 1
draft = build(n, 1.0)
spec = draft.with_epsilon(calibrate_epsilon(draft))
curves = sample_nullclines(spec, plane)
for c in curves:
    mid = c.points[len(c.points) // 2]
    sign = crossing_direction(spec, c, mid)
    print(f"{c.curve_id:6s} {c.which}-nullcline {c.source_factor.describe(f'y{plane}'):40s} "
          f"axis {c.axis_intersections} crossing sign {sign:+d}")

(out / f"nullclines_n{n}_p{plane}.svg").write_text(curves_to_svg(spec, plane, curves))
(out / f"nullclines_n{n}_p{plane}.csv").write_text(curves_to_csv(curves))
print("wrote", sorted(p.name for p in out.iterdir()))
