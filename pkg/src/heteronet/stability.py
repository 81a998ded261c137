"""Transition-matrix stability of two-node cycles.

For a cycle ``i -> k -> i`` every node contributes a basic matrix whose first
column is built from the node's eigenvalues and whose remaining columns are
identity columns. The return map to the incoming section of node ``i`` is
``M^(i) = M_i @ M_k``. A cycle is fragmentarily asymptotically stable when
the leading eigenvalue of the return map is real, exceeds one and has an
eigenvector with components of one strict sign; otherwise it is completely
unstable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .construct import VectorFieldSpec
from .dynamics import node_equilibrium
from .errors import InvalidArgumentError
from .graph import DNNGraph

COMPLETELY_UNSTABLE = "completely-unstable"
FRAGMENTARILY_STABLE = "fragmentarily-asymptotically-stable"
INDETERMINATE = "indeterminate"

UNIT_TOL = 1e-9
SIGN_TOL = 1e-12


@dataclass(frozen=True)
class NodeRates:
    """Eigenvalue magnitudes at one node of a two-node cycle.

    ``contracting`` is ``c`` along the incoming plane, ``expanding`` is ``e``
    along the outgoing plane and ``transverse`` holds the signed eigenvalues
    of the remaining y-directions in increasing plane order.
    """

    node: int
    radial: float
    contracting: float
    expanding: float
    transverse: tuple[float, ...] = ()

    def __post_init__(self):
        for name in ("radial", "contracting", "expanding"):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(
                    f"node {self.node}: {name} rate must be a positive magnitude, got {getattr(self, name)}"
                )
        if any(t == 0 for t in self.transverse):
            raise InvalidArgumentError(f"node {self.node}: zero transverse eigenvalue")


@dataclass(frozen=True)
class CycleSpec:
    nodes: tuple[int, int]
    planes: tuple[int, int]
    transverse_planes: tuple[int, ...]
    eigen_data: tuple[NodeRates, NodeRates]

    @property
    def size(self) -> int:
        return 1 + len(self.transverse_planes)


def basic_matrix(rates: NodeRates) -> np.ndarray:
    """Basic transition matrix across one node.

    First column ``(c / e, -t_1 / e, ..., -t_m / e)`` with signed transverse
    eigenvalues ``t``; a contracting transverse direction therefore enters
    with a positive sign and an expanding one with a negative sign.
    """
    m = len(rates.transverse)
    M = np.eye(m + 1)
    M[0, 0] = rates.contracting / rates.expanding
    for q, t in enumerate(rates.transverse, start=1):
        M[q, 0] = -t / rates.expanding
    return M


@dataclass
class TransitionData:
    basic_matrices: list[np.ndarray]
    products: list[np.ndarray]
    sections: tuple[int, ...]
    lambda_max: list[complex] = field(default_factory=list)
    w_max: list[np.ndarray] = field(default_factory=list)


def _leading(M: np.ndarray) -> tuple[complex, np.ndarray, np.ndarray]:
    vals, vecs = np.linalg.eig(M)
    mags = np.abs(vals)
    top = np.flatnonzero(mags >= mags.max() - UNIT_TOL * max(1.0, mags.max()))
    # among ties prefer the eigenvector that actually moves the first coordinate
    best = max(top, key=lambda i: abs(vecs[0, i]))
    w = vecs[:, best]
    lead = np.argmax(np.abs(w))
    w = w / w[lead]
    w = w / np.linalg.norm(w)
    lam = vals[best]
    if abs(np.imag(lam)) <= UNIT_TOL * max(1.0, abs(lam)):
        lam = complex(np.real(lam), 0.0)
        w = np.real(w) if np.all(np.abs(np.imag(w)) <= SIGN_TOL) else w
    return lam, w, vals


def build_transition_matrices(cycle: CycleSpec) -> TransitionData:
    a, b = cycle.eigen_data
    Ma, Mb = basic_matrix(a), basic_matrix(b)
    products = [Ma @ Mb, Mb @ Ma]
    td = TransitionData(basic_matrices=[Ma, Mb], products=products, sections=cycle.nodes)
    for P in products:
        lam, w, _ = _leading(P)
        td.lambda_max.append(lam)
        td.w_max.append(w)
    return td


@dataclass
class SectionVerdict:
    section: int
    lambda_max: complex
    w_max: np.ndarray
    real: bool
    exceeds_one: bool | None
    same_sign: bool | None
    verdict: str

    def to_dict(self) -> dict:
        lam = complex(self.lambda_max)
        return {
            "section": self.section,
            "lambda_max": lam.real if lam.imag == 0 else [lam.real, lam.imag],
            "w_max": [complex(v).real for v in self.w_max] if np.isrealobj(self.w_max) else [
                [complex(v).real, complex(v).imag] for v in self.w_max
            ],
            "condition_i_real": self.real,
            "condition_ii_exceeds_one": self.exceeds_one,
            "condition_iii_same_sign": self.same_sign,
            "verdict": self.verdict,
        }


@dataclass
class CycleClassification:
    verdict: str
    sections: list[SectionVerdict]

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "sections": [s.to_dict() for s in self.sections]}


def _classify_section(section: int, M: np.ndarray) -> SectionVerdict:
    lam, w, vals = _leading(M)
    real = lam.imag == 0
    n_unit = int(np.sum(np.abs(vals - 1.0) <= UNIT_TOL))
    if not real:
        exceeds = False
    elif n_unit > M.shape[0] - 1:
        exceeds = None
    else:
        exceeds = bool(lam.real > 1.0 + UNIT_TOL)
    if not real:
        same = False
    else:
        wr = np.real(w)
        if np.any(np.abs(wr) <= SIGN_TOL):
            same = None
        else:
            same = bool(np.all(wr > 0) or np.all(wr < 0))
    conds = (real, exceeds, same)
    if any(c is False for c in conds):
        verdict = COMPLETELY_UNSTABLE
    elif any(c is None for c in conds):
        verdict = INDETERMINATE
    else:
        verdict = FRAGMENTARILY_STABLE
    return SectionVerdict(section, lam, w, real, exceeds, same, verdict)


def classify_cycle(td: TransitionData) -> CycleClassification:
    """Check the three leading-eigenvalue conditions on each return section.

    The overall verdict is the conservative conjunction: stable only if every
    section is stable, unstable if any section is unstable.
    """
    sections = [_classify_section(s, P) for s, P in zip(td.sections, td.products)]
    verdicts = {s.verdict for s in sections}
    if COMPLETELY_UNSTABLE in verdicts:
        verdict = COMPLETELY_UNSTABLE
    elif verdicts == {FRAGMENTARILY_STABLE}:
        verdict = FRAGMENTARILY_STABLE
    else:
        verdict = INDETERMINATE
    return CycleClassification(verdict, sections)


def cycle_spec_from_field(spec: VectorFieldSpec, graph: DNNGraph, i: int, k: int) -> CycleSpec:
    """Read the eigen data of cycle ``i -> k -> i`` from the node Jacobians."""
    if (i, k) not in graph.plane_of_edge or (k, i) not in graph.plane_of_edge:
        raise InvalidArgumentError(f"nodes {i} and {k} do not form a two-node cycle")
    p_ik = graph.plane_of_edge[(i, k)]
    p_ki = graph.plane_of_edge[(k, i)]
    slots = {j: s for s, j in enumerate(spec.plane_indices, start=1)}
    transverse = tuple(j for j in spec.plane_indices if j not in (p_ik, p_ki))
    rates = []
    for node, p_in, p_out in ((i, p_ki, p_ik), (k, p_ik, p_ki)):
        lam = node_equilibrium(spec, node).eigenvalues
        rates.append(
            NodeRates(
                node=node,
                radial=float(-lam[0]),
                contracting=float(-lam[slots[p_in]]),
                expanding=float(lam[slots[p_out]]),
                transverse=tuple(float(lam[slots[j]]) for j in transverse),
            )
        )
    return CycleSpec((i, k), (p_ik, p_ki), transverse, (rates[0], rates[1]))


@dataclass
class CycleAnalysis:
    cycle: CycleSpec
    transition: TransitionData
    classification: CycleClassification
    branch: str

    @property
    def verdict(self) -> str:
        return self.classification.verdict

    def inequality_values(self) -> dict[str, list[float]]:
        """Sub-diagonal first-column entries of each return matrix.

        With ``lambda_max > 1`` all of them positive is equivalent to the
        sign condition on the leading eigenvector.
        """
        return {
            f"section_{s}": [float(v) for v in P[1:, 0]]
            for s, P in zip(self.transition.sections, self.transition.products)
        }

    def to_dict(self) -> dict:
        a, b = self.cycle.eigen_data
        return {
            "nodes": list(self.cycle.nodes),
            "planes": list(self.cycle.planes),
            "transverse_planes": list(self.cycle.transverse_planes),
            "branch": self.branch,
            "eigen_data": [
                {
                    "node": r.node,
                    "r": r.radial,
                    "c": r.contracting,
                    "e": r.expanding,
                    "transverse": list(r.transverse),
                }
                for r in (a, b)
            ],
            "basic_matrices": [M.tolist() for M in self.transition.basic_matrices],
            "return_matrices": [P.tolist() for P in self.transition.products],
            "return_alpha": float(self.transition.products[0][0, 0]),
            "inequalities": self.inequality_values(),
            "classification": self.classification.to_dict(),
        }


def analyze_network_cycles(spec: VectorFieldSpec, graph: DNNGraph) -> list[CycleAnalysis]:
    """Classify every two-node cycle of the graph from the realised field."""
    out = []
    for i, k in graph.two_cycles():
        cyc = cycle_spec_from_field(spec, graph, i, k)
        td = build_transition_matrices(cyc)
        all_expanding = all(t > 0 for r in cyc.eigen_data for t in r.transverse)
        branch = "all-transverse-expanding" if all_expanding and cyc.size == 2 else "general"
        out.append(CycleAnalysis(cyc, td, classify_cycle(td), branch))
    return out
