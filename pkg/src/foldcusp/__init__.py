"""Planar Filippov systems around fold-cusp singularities.

Switching-line classification, sliding dynamics, return maps, canard-cycle
detection and case classification of the invisible and visible fold-cusp
unfoldings.
"""
from .bifurcation import (
    BifDiagram,
    CaseLabel,
    GridSpec,
    SigmaSignature,
    classify_case,
    equivalence_class,
    find_L1,
    signature,
    sweep,
)
from .estimator import FoldCuspCaseClassifier
from .families import (
    BumpFunction,
    FilippovSystem,
    FoldCuspParams,
    bump_construct,
    bump_printed,
    gst_slice,
    make_invisible_family,
    make_visible_family,
    potential_F,
    standard_form,
    validate_bump,
)
from .planefield import SmoothField, SwitchingFunction, flow_to_section, lie_derivative
from .retmaps import (
    CanardCycle,
    FixedPointRecord,
    detect_canard_cycles,
    first_return_psi,
    fixed_points,
    fold_transition_xi,
    psi_map,
    rho_X,
    rho_Y,
)
from .switching import (
    PseudoEquilibrium,
    SigmaPointClass,
    TangencyKind,
    classify_sigma_point,
    count_identity_check,
    direction_function,
    find_pseudo_equilibria,
    find_tangencies,
    sliding_field,
)
from .trajectory import Trajectory, TrajectoryEvent, simulate

__all__ = [
    "BifDiagram",
    "CaseLabel",
    "GridSpec",
    "SigmaSignature",
    "classify_case",
    "equivalence_class",
    "find_L1",
    "signature",
    "sweep",
    "FoldCuspCaseClassifier",
    "BumpFunction",
    "FilippovSystem",
    "FoldCuspParams",
    "bump_construct",
    "bump_printed",
    "gst_slice",
    "make_invisible_family",
    "make_visible_family",
    "potential_F",
    "standard_form",
    "validate_bump",
    "SmoothField",
    "SwitchingFunction",
    "flow_to_section",
    "lie_derivative",
    "CanardCycle",
    "FixedPointRecord",
    "detect_canard_cycles",
    "first_return_psi",
    "fixed_points",
    "fold_transition_xi",
    "psi_map",
    "rho_X",
    "rho_Y",
    "PseudoEquilibrium",
    "SigmaPointClass",
    "TangencyKind",
    "classify_sigma_point",
    "count_identity_check",
    "direction_function",
    "find_pseudo_equilibria",
    "find_tangencies",
    "sliding_field",
    "Trajectory",
    "TrajectoryEvent",
    "simulate",
]

__version__ = "0.1.0"
