"""Nodal radial solutions of the 2-D Henon equation and their Morse indices."""

from .config import DEFAULT, Settings
from .errors import (
    HenonMorseError,
    NonConvergenceError,
    SchemaError,
    TwoRouteError,
    UsageError,
    VerificationError,
)
from .morse import (
    BoundCheck,
    MorseReport,
    SweepResult,
    assemble_morse,
    check_lower_bounds,
    large_exponent_probe,
    monotonicity_sweep,
    sweep_from_reports,
)
from .radial import (
    HenonParams,
    RadialProfile,
    ShootingTrajectory,
    evaluate_profile,
    integrate_ivp,
    ode_residual,
    solve_nodal,
    validate_profile,
)
from .spectrum import (
    RadialSpectrum,
    SchrodingerProblem,
    build_schrodinger,
    mode_negative_count,
    negative_spectrum,
    radial_morse_index,
)
from .transform import (
    ComparisonReport,
    KappaMap,
    TestFunction,
    default_battery,
    dirichlet_energy,
    quadratic_form,
    radial_map,
    transform_solution,
    verify_form_comparison,
)
from .verify import GRIDS, BatterySummary, SectionResult, run_battery

__version__ = "0.1.0"
