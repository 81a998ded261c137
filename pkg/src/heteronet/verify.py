"""Numerical evidence that a constructed field realises its DNN graph."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .construct import VectorFieldSpec, calibrate_epsilon
from .dynamics import (
    classify,
    find_axis_equilibria,
    jacobian,
    eval_field,
    node_equilibrium,
)
from .errors import (
    CalibrationError,
    ConstructionViolation,
    InvalidArgumentError,
    NonHyperbolicError,
)
from .graph import DNNGraph, Edge
from .integrate import ENTERED_BALL, integrate

VERIFIED = "verified"
FAILED = "failed"
SKIPPED = "skipped"


@dataclass(frozen=True)
class VerifyParams:
    delta: float = 1e-3
    eta: float = 1e-2
    t_max: float = 1e4
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    method: str = "auto"
    seed: int = 0
    jacobian_probes: int = 20
    fd_step: float = 1e-6
    fd_tol: float = 1e-6
    kappa: float = 0.01

    def __post_init__(self):
        if not 1e-6 <= self.delta <= 1e-2:
            raise InvalidArgumentError(f"delta must lie in [1e-6, 1e-2], got {self.delta}")
        if not self.eta > self.delta:
            raise InvalidArgumentError(f"eta ({self.eta}) must exceed delta ({self.delta})")
        if not self.t_max > 0:
            raise InvalidArgumentError(f"t_max must be positive, got {self.t_max}")


@dataclass
class ConnectionReport:
    edge: Edge
    plane: int
    verdict: str
    flight_time: float
    miss_distance: float
    start_offset: float
    terminal_event: str = ""
    reached_node: int | None = None
    method: str = ""
    steps: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["edge"] = list(self.edge)
        return d


@dataclass
class AbsenceEntry:
    node: int
    plane: int
    verdict: str
    restricted_eigenvalues: tuple[float, float]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["restricted_eigenvalues"] = list(self.restricted_eigenvalues)
        return d


@dataclass
class CheckResult:
    name: str
    passed: bool
    details: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "details": list(self.details)}


@dataclass
class RealizationReport:
    n: int
    epsilon: float
    mode: str
    params: VerifyParams
    checks: list[CheckResult]
    connections: list[ConnectionReport]
    absences: list[AbsenceEntry]
    cycles: list[dict] | None = None

    @property
    def verified(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def causes(self) -> list[str]:
        out = []
        for c in self.checks:
            if not c.passed:
                out.extend(f"{c.name}: {d}" for d in c.details) if c.details else out.append(c.name)
        return out

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        out = {
            "n": self.n,
            "epsilon": self.epsilon,
            "mode": self.mode,
            "params": asdict(self.params),
            "verified": self.verified,
            "causes": self.causes,
            "checks": [c.to_dict() for c in self.checks],
            "connections": [c.to_dict() for c in self.connections],
            "absences": [a.to_dict() for a in self.absences],
        }
        if self.cycles is not None:
            out["cycles"] = self.cycles
        return out


def _slot(spec: VectorFieldSpec, plane: int) -> int:
    try:
        return spec.plane_indices.index(plane) + 1
    except ValueError:
        raise InvalidArgumentError(f"plane {plane} does not exist for n={spec.n}") from None


def verify_edge(
    spec: VectorFieldSpec,
    graph: DNNGraph,
    edge: Edge,
    delta: float = 1e-3,
    eta: float = 1e-2,
    t_max: float = 1e4,
    rel_tol: float = 1e-9,
    abs_tol: float = 1e-12,
    plane: int | None = None,
    method: str = "auto",
) -> ConnectionReport:
    """Shoot from ``source + delta * e_{y_j}`` and see which node ball is entered.

    ``plane`` defaults to the plane the graph assigns to ``edge``; passing it
    explicitly allows probing connections that are not in the graph.
    """
    edge = (int(edge[0]), int(edge[1]))
    if plane is None:
        if edge not in graph.plane_of_edge:
            raise InvalidArgumentError(f"edge {edge} is not in the DNN graph on {graph.n} nodes")
        plane = graph.plane_of_edge[edge]
    VerifyParams(delta=delta, eta=eta, t_max=t_max)
    src, tgt = edge
    slot = _slot(spec, plane)
    start = spec.node_point(src)
    start[slot] = delta
    balls = [(spec.node_point(k), eta) for k in range(1, spec.n + 1)]
    traj = integrate(
        spec, start, t_max=t_max, rel_tol=rel_tol, abs_tol=abs_tol, events=balls,
        method=method, stiffness_probes=[spec.node_point(tgt)],
    )
    target = spec.node_point(tgt)
    miss = float(np.min(np.linalg.norm(traj.points - target, axis=1)))
    reached = traj.event_index + 1 if traj.terminal_event == ENTERED_BALL else None
    ok = reached == tgt
    return ConnectionReport(
        edge=edge,
        plane=plane,
        verdict=VERIFIED if ok else FAILED,
        flight_time=traj.final_time,
        miss_distance=miss,
        start_offset=delta,
        terminal_event=traj.terminal_event,
        reached_node=reached,
        method=traj.method,
        steps=traj.steps,
    )


def verify_absence(spec: VectorFieldSpec, graph: DNNGraph, plane: int) -> list[AbsenceEntry]:
    """Every node not connected inside ``plane`` must be a sink there.

    Sources and targets of the plane's edges are skipped; the remaining
    nodes are the ones whose unwanted connections must be blocked.
    """
    slot = _slot(spec, plane)
    involved = set(graph.sources_in_plane(plane)) | set(graph.targets_in_plane(plane))
    out = []
    for k in graph.nodes:
        if k in involved:
            continue
        lam = node_equilibrium(spec, k).restricted_eigenvalues(slot)
        ok = bool(np.all(lam < 0))
        out.append(
            AbsenceEntry(k, plane, VERIFIED if ok else FAILED, (float(lam[0]), float(lam[1])))
        )
    return out


def _check_axis(spec: VectorFieldSpec) -> CheckResult:
    try:
        eqs = find_axis_equilibria(spec)
    except ConstructionViolation as exc:
        return CheckResult("axis_equilibria", False, [str(exc)])
    bad = []
    for e in eqs:
        k = round(e.x)
        if abs(e.x - k) > 1e-9:
            bad.append(f"axis equilibrium at x={e.x!r} is not within 1e-9 of an integer")
        if e.is_node != (k % 2 == 1):
            bad.append(f"node flag wrong at x={e.x!r}")
    return CheckResult("axis_equilibria", not bad, bad)


def _check_xnullcline_axis(spec: VectorFieldSpec) -> CheckResult:
    """Each plane's x-nullcline must cross the axis once at every axis equilibrium.

    The zeros of ``f_j(x, 0)`` are read from the factors. They must be the
    ``2n - 1`` integers, each simple, so that the perturbed field keeps one
    equilibrium per crossing with the intended alternation of stability.
    """
    bad = []
    expected = set(range(1, 2 * spec.n))
    for p in spec.planes:
        roots: dict[float, int] = {}
        for t in p.f:
            for r in t.axis_intersections():
                if -1e-12 <= r <= 2 * spec.n + 1e-12:
                    key = round(r, 9)
                    roots[key] = roots.get(key, 0) + 1
        distinct = set(roots)
        if distinct != {float(k) for k in expected}:
            bad.append(
                f"plane {p.plane}: x-nullcline meets the axis at {len(distinct)} points, "
                f"expected {len(expected)} (missing {sorted(expected - distinct)})"
            )
        multiple = sorted(r for r, m in roots.items() if m > 1)
        if multiple:
            bad.append(f"plane {p.plane}: repeated axis crossings at {multiple}")
    return CheckResult("equilibrium_count", not bad, bad)


def _check_sign_pattern(spec: VectorFieldSpec, graph: DNNGraph) -> CheckResult:
    bad = []
    for k in graph.nodes:
        eq = node_equilibrium(spec, k)
        if not eq.eigenvalues[0] < 0:
            bad.append(f"node {k}: x-eigenvalue {eq.eigenvalues[0]!r} is not negative")
        outgoing = graph.outgoing_planes(k)
        for slot, j in enumerate(spec.plane_indices, start=1):
            lam = eq.eigenvalues[slot]
            if (lam > 0) != (j in outgoing):
                want = "positive" if j in outgoing else "negative"
                bad.append(f"node {k}, plane {j}: eigenvalue {lam!r} should be {want}")
    for e in find_axis_equilibria(spec):
        if not e.is_node and not e.eigenvalues[0] > 0:
            bad.append(f"equilibrium x={e.x!r}: x-eigenvalue should be positive")
    return CheckResult("sign_pattern", not bad, bad)


def _check_hyperbolic(spec: VectorFieldSpec) -> CheckResult:
    bad = []
    for e in find_axis_equilibria(spec):
        try:
            classify(e)
        except NonHyperbolicError as exc:
            bad.append(str(exc))
    return CheckResult("hyperbolicity", not bad, bad)


def _check_epsilon(spec: VectorFieldSpec, kappa: float) -> CheckResult:
    try:
        eps_max = calibrate_epsilon(spec, kappa)
    except CalibrationError as exc:
        return CheckResult("epsilon_bound", False, [str(exc)])
    if spec.epsilon > eps_max:
        return CheckResult(
            "epsilon_bound",
            False,
            [f"epsilon={spec.epsilon!r} exceeds the largest admissible value {eps_max!r} for kappa={kappa}"],
        )
    return CheckResult("epsilon_bound", True)


def random_interior_points(spec: VectorFieldSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    """Points with ``x`` in ``(0, 2n)`` and every ``y_j`` in ``(0, 1)``."""
    pts = np.empty((count, spec.dim))
    pts[:, 0] = rng.uniform(0.0, 2.0 * spec.n, count)
    pts[:, 1:] = rng.uniform(0.0, 1.0, (count, spec.dim - 1))
    return pts


def jacobian_fd_error(spec: VectorFieldSpec, point, step: float = 1e-6) -> float:
    """Largest row-wise relative error of the analytic Jacobian against central differences."""
    J = jacobian(spec, point)
    fd = np.empty_like(J)
    for i in range(spec.dim):
        e = np.zeros(spec.dim)
        e[i] = step
        fd[:, i] = (eval_field(spec, point + e) - eval_field(spec, point - e)) / (2 * step)
    scale = np.maximum(np.max(np.abs(J), axis=1), 1e-300)
    return float(np.max(np.max(np.abs(J - fd), axis=1) / scale))


def _check_jacobian(spec: VectorFieldSpec, params: VerifyParams) -> CheckResult:
    rng = np.random.default_rng(params.seed)
    bad = []
    for p in random_interior_points(spec, params.jacobian_probes, rng):
        err = jacobian_fd_error(spec, p, params.fd_step)
        if not err < params.fd_tol:
            bad.append(f"relative error {err:.3e} at {np.array2string(p, precision=6)}")
    return CheckResult("jacobian_probe", not bad, bad)


def verify_realization(
    spec: VectorFieldSpec, graph: DNNGraph, params: VerifyParams | None = None
) -> RealizationReport:
    """Run every structural and dynamical check and aggregate the verdicts."""
    if spec.n != graph.n:
        raise InvalidArgumentError(f"spec is for n={spec.n} but the graph has n={graph.n}")
    params = params or VerifyParams()
    axis = _check_axis(spec)
    skipped = ["skipped: axis equilibria are wrong"]
    checks = [
        axis,
        _check_xnullcline_axis(spec),
        _check_sign_pattern(spec, graph) if axis.passed else CheckResult("sign_pattern", False, skipped),
        _check_hyperbolic(spec) if axis.passed else CheckResult("hyperbolicity", False, skipped),
        _check_epsilon(spec, params.kappa),
    ]
    connections = []
    for e in sorted(graph.edges, key=lambda e: (graph.plane_of_edge[e], e[0], e[1])):
        connections.append(
            verify_edge(
                spec, graph, e, params.delta, params.eta, params.t_max,
                params.rel_tol, params.abs_tol, method=params.method,
            )
        )
    failed = [c for c in connections if c.verdict != VERIFIED]
    checks.append(
        CheckResult(
            "connections",
            not failed and len(connections) == 2 * graph.n,
            [
                f"{c.edge[0]}->{c.edge[1]} in plane {c.plane}: {c.terminal_event}"
                + (f", reached node {c.reached_node}" if c.reached_node else "")
                for c in failed
            ],
        )
    )
    absences = []
    for j in spec.plane_indices:
        absences.extend(verify_absence(spec, graph, j))
    bad_abs = [a for a in absences if a.verdict != VERIFIED]
    checks.append(
        CheckResult(
            "absences",
            not bad_abs,
            [f"node {a.node} is not a sink in plane {a.plane}: {a.restricted_eigenvalues}" for a in bad_abs],
        )
    )
    checks.append(_check_jacobian(spec, params))
    return RealizationReport(
        n=spec.n,
        epsilon=spec.epsilon,
        mode=spec.mode,
        params=params,
        checks=checks,
        connections=connections,
        absences=absences,
    )


def summarize(report: RealizationReport) -> Sequence[str]:
    lines = [f"n={report.n} eps={report.epsilon!r} mode={report.mode}"]
    for c in report.checks:
        lines.append(f"  {'PASS' if c.passed else 'FAIL'} {c.name}")
        lines.extend(f"      {d}" for d in c.details[:10])
    ok = sum(c.verdict == VERIFIED for c in report.connections)
    lines.append(f"  connections verified: {ok}/{len(report.connections)}")
    lines.append(f"  overall: {'verified' if report.verified else 'failed'}")
    return lines
