"""Mass-constrained NLS ground states on tadpole metric graphs with the
nonlinearity localized on the compact core."""

__version__ = "0.1.0"

from .graphs import (
    EdgeSpec,
    GridFunction,
    MetricGraph,
    build_halfline,
    build_line,
    build_tadpole,
    kinetic,
    kirchhoff_residual,
    mass,
    normalized,
)
from .energy import (
    EnergyBreakdown,
    SOLITON_MASS,
    energy_full,
    energy_gradient,
    energy_localized,
    estimate_gn_constant,
    gn_infty_quotient,
    gn_quotient,
    soliton_profile,
)
from .minimize import (
    MinimizeConfig,
    MinimizeReport,
    lambda_estimate,
    minimize,
    preset_inits,
)
from .stationary import (
    CrossValidation,
    ShootingError,
    ShootingSolution,
    integrate_loop,
    shoot,
    shoot_at_mass,
    sweep_lambda,
    verify_against_minimizer,
)
from .thresholds import (
    MU_HALFLINE,
    MU_LINE,
    MU_WITNESS,
    ScanPoint,
    ThresholdReport,
    Witness,
    optimal_witness,
    scan_mass,
    test_function_energy,
    unbounded_witness,
    vanishing_family,
    write_scan_csv,
    write_scan_json,
)

__all__ = [
    "EdgeSpec", "GridFunction", "MetricGraph",
    "build_halfline", "build_line", "build_tadpole",
    "mass", "kinetic", "kirchhoff_residual", "normalized",
    "EnergyBreakdown", "SOLITON_MASS",
    "energy_localized", "energy_full", "energy_gradient",
    "gn_quotient", "gn_infty_quotient", "estimate_gn_constant", "soliton_profile",
    "MinimizeConfig", "MinimizeReport", "minimize", "lambda_estimate", "preset_inits",
    "ShootingSolution", "ShootingError", "CrossValidation",
    "integrate_loop", "shoot", "sweep_lambda", "shoot_at_mass",
    "verify_against_minimizer",
    "MU_LINE", "MU_HALFLINE", "MU_WITNESS",
    "Witness", "ScanPoint", "ThresholdReport",
    "test_function_energy", "optimal_witness", "vanishing_family",
    "unbounded_witness", "scan_mass", "write_scan_csv", "write_scan_json",
]
