"""Polynomial vector fields realising double-next-neighbour heteroclinic networks.

Typical use::

    from heteronet import build, build_graph, calibrate_epsilon, verify_realization

    draft = build(6)
    spec = draft.with_epsilon(calibrate_epsilon(draft))
    report = verify_realization(spec, build_graph(6))
"""

from .construct import (
    FactorKind,
    FactorTerm,
    IndexSets,
    PlaneComponents,
    VectorFieldSpec,
    build,
    build_explicit,
    build_general,
    calibrate_epsilon,
    index_sets,
    wide_ellipse_params,
)
from .dynamics import (
    Equilibrium,
    classify,
    eval_field,
    find_axis_equilibria,
    find_plane_equilibria,
    jacobian,
)
from .errors import (
    CalibrationError,
    ConstructionViolation,
    HeteronetError,
    InvalidArgumentError,
    NonHyperbolicError,
    UnsupportedError,
)
from .graph import DNNGraph, build_graph, expected_edge_count
from .integrate import Trajectory, integrate
from .nullclines import NullclineCurve, crossing_direction, sample_nullclines
from .stability import (
    CycleSpec,
    TransitionData,
    analyze_network_cycles,
    build_transition_matrices,
    classify_cycle,
)
from .verify import ConnectionReport, verify_absence, verify_edge, verify_realization

__all__ = [
    "CalibrationError",
    "ConnectionReport",
    "ConstructionViolation",
    "CycleSpec",
    "DNNGraph",
    "Equilibrium",
    "FactorKind",
    "FactorTerm",
    "HeteronetError",
    "IndexSets",
    "InvalidArgumentError",
    "NonHyperbolicError",
    "NullclineCurve",
    "PlaneComponents",
    "Trajectory",
    "TransitionData",
    "UnsupportedError",
    "VectorFieldSpec",
    "analyze_network_cycles",
    "build",
    "build_explicit",
    "build_general",
    "build_graph",
    "build_transition_matrices",
    "calibrate_epsilon",
    "classify",
    "classify_cycle",
    "crossing_direction",
    "eval_field",
    "expected_edge_count",
    "find_axis_equilibria",
    "find_plane_equilibria",
    "index_sets",
    "integrate",
    "jacobian",
    "sample_nullclines",
    "verify_absence",
    "verify_edge",
    "verify_realization",
    "wide_ellipse_params",
]
