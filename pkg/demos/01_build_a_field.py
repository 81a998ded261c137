"""
Building a field for a DNN graph
================================

A double-next-neighbour graph on ``n`` nodes has the edges ``k -> k+1`` and
``k -> k+2``. We build the graph, the polynomial field that realises it and
look at the equilibria on the x-axis.
"""

from __future__ import annotations

import numpy as np

from heteronet import build, build_graph, calibrate_epsilon, find_axis_equilibria, jacobian

n = 5
graph = build_graph(n)
print("edges:", graph.edges)
for j in graph.planes:
    print(f"plane {j} carries", graph.edges_in_plane(j))

# Build with a placeholder epsilon, then pick the largest decade that keeps
# the axis term a small perturbation of the in-plane terms.
draft = build(n, 1.0)
spec = draft.with_epsilon(calibrate_epsilon(draft, kappa=0.01))
print(spec.equations())

# Nodes sit at odd integers and alternate with unstable equilibria.
for eq in find_axis_equilibria(spec):
    kind = "node" if eq.is_node else "saddle"
    print(f"x = {eq.x:.12f}  {kind:6s} x-eigenvalue {eq.eigenvalues[0]: .3e}")

# The node Jacobian is triangular; its diagonal says which planes a node leaves along.
for k in graph.nodes:
    lam = np.diag(jacobian(spec, spec.node_point(k)))
    out = sorted(graph.outgoing_planes(k))
    print(f"node {k}: y-eigenvalues {np.array2string(lam[1:], precision=3)} outgoing planes {out}")
