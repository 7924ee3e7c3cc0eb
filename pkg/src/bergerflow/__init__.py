"""Berger-deformed bundle metrics over complex space forms.

Numerical engine for the one-parameter deformation of the natural metric on
tangent and unit-tangent bundles that rescales the fiber direction J xi. The
package verifies the connection identities of the deformed metric, integrates
the reduced geodesic system, and analyzes the generalized curvatures of
projected base curves, whose constancy on the unit bundle reduces the whole
Frenet apparatus to powers of a single skew operator.
"""

from .config import ConfigError, ExperimentConfig, ToleranceSet, load_config
from .flow import (
    BundleState,
    FlowConfig,
    FlowError,
    InfeasibleSpeedError,
    IntegrationAbort,
    MissingDirectionError,
    Trajectory,
    VerticalGeodesicWarning,
    conserved_report,
    integrate,
    lifted_speed,
    prepare_initial,
    random_initial_states,
    rhs_t1m,
    rhs_tm,
    twisted_rate_check,
)
from .frenet import (
    CurvatureProfile,
    DegenerateProjectionError,
    algebraic_chain,
    constancy_summary,
    curvature_profile,
    generalized_curvatures,
    gram_profile,
    numeric_chain,
    span_residuals,
    vanishing_summary,
)
from .lifted import (
    FiberPoint,
    FieldJet,
    LiftedVector,
    horizontal_lift,
    koszul_residual,
    lift_bracket,
    lifted_connection,
    lifted_inner,
    random_jet,
    vertical_lift,
)
from .reports import Report, report_json, write_profile_csv, write_trajectory_csv
from .space_form import (
    BergerParams,
    SpaceFormModel,
    apply_J,
    inner,
    riemann,
    twisted_apply,
    twisted_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "BergerParams",
    "BundleState",
    "ConfigError",
    "CurvatureProfile",
    "DegenerateProjectionError",
    "ExperimentConfig",
    "FiberPoint",
    "FieldJet",
    "FlowConfig",
    "FlowError",
    "InfeasibleSpeedError",
    "IntegrationAbort",
    "LiftedVector",
    "MissingDirectionError",
    "Report",
    "SpaceFormModel",
    "ToleranceSet",
    "Trajectory",
    "VerticalGeodesicWarning",
    "algebraic_chain",
    "apply_J",
    "conserved_report",
    "constancy_summary",
    "curvature_profile",
    "generalized_curvatures",
    "gram_profile",
    "horizontal_lift",
    "inner",
    "integrate",
    "koszul_residual",
    "lift_bracket",
    "lifted_connection",
    "lifted_inner",
    "lifted_speed",
    "load_config",
    "numeric_chain",
    "prepare_initial",
    "random_initial_states",
    "random_jet",
    "report_json",
    "rhs_t1m",
    "rhs_tm",
    "riemann",
    "span_residuals",
    "twisted_apply",
    "twisted_matrix",
    "twisted_rate_check",
    "vanishing_summary",
    "vertical_lift",
    "write_profile_csv",
    "write_trajectory_csv",
]
