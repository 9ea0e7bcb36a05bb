"""Filippov and albedo-smoothed analysis of a seasonally forced sea-ice energy balance model."""

from .bifurcation import (
    BifurcationPoints,
    BifurcationSet,
    Diagram,
    DiagramRow,
    JumpResult,
    WidthResult,
    bifurcation_set,
    branch_diagram,
    find_bifurcation_points,
    find_l_i,
    find_l_o,
    find_saddle_nodes,
    grid_params,
    jump_grid,
    jump_min_e,
    sliding_width_sweep,
    smoothed_diagram,
)
from .branches import (
    BranchPoint,
    Trajectory,
    all_branches,
    ice_covered_branch,
    ice_free_branch,
    integral_i_minus,
    integral_i_plus,
    orbit_energy,
    reconstruct_trajectory,
    seasonal_solutions,
    simulate_filippov,
)
from .exceptions import (
    BoundaryEvaluationError,
    BranchSelectionError,
    DegenerateRatioError,
    InconsistentBranchError,
    InfeasibleAmplitudesError,
    IntegrationError,
    InverseMappingError,
    ModelError,
    NoRealRootError,
    NotFoundError,
    ParameterError,
    SlidingEntryError,
)
from .forcing import DEFAULTS, ForcingParams, StandardForm, f_minus, f_plus, f_smoothed, rhs, to_standard_form
from .param_map import StandardTarget, from_standard_form, inverse_branches
from .sliding import SlidingIntervals, detect_attracting, find_boundary_times
from .smoothed import FixedPoint, PoincareScan, integrate_year, poincare_fixed_points, section_curve

__version__ = "0.1.0"
