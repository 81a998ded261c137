"""
Stability of the two-node cycles
================================

Small networks contain cycles ``i -> k -> i``. Their stability follows from
transition matrices built out of the node eigenvalues.
"""

from __future__ import annotations

import textwrap

import numpy as np

from heteronet import analyze_network_cycles, build, build_graph, calibrate_epsilon

for n in (3, 4):
    draft = build(n, 1.0)
    spec = draft.with_epsilon(calibrate_epsilon(draft))
    for cyc in analyze_network_cycles(spec, build_graph(n)):
        i, k = cyc.cycle.nodes
        print(f"n={n} C{i}{k}: {cyc.verdict} (branch {cyc.branch})")
        for sec, P in zip(cyc.transition.sections, cyc.transition.products):
            print(f"  return matrix at section {sec}:")
            print(textwrap.indent(np.array2string(P, precision=4), "    "))
        for s in cyc.classification.sections:
            print(f"  section {s.section}: lambda_max={complex(s.lambda_max).real:.4g} "
                  f"real={s.real} >1={s.exceeds_one} same sign={s.same_sign}")
