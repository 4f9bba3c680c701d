"""Network valuation of financial systems with debt valuation factors.

Equities of interconnected institutions are computed as the fixed point of
the NEVA map under shocks to external assets, with valuation functions from
linear DebtRank, recovery DebtRank and reduced-form credit models with an
optional interest-rate feedback.
"""

from .network import (
    FinancialNetwork,
    Institution,
    NetworkValidationError,
    apply_shock,
    book_equity,
    current_assets,
    validate,
)
from .valuation import (
    ValuationModel,
    SystemState,
    ModelError,
    DegenerateInstitutionError,
    calibrate,
    check_feasibility,
    delta_r,
    internal_values,
    ir_feedback,
    linear_debtrank,
    recovery_debtrank,
    reduced_form,
    spread,
    spreads,
    system_state,
    value_external,
    value_internal,
)
from .solver import ConvergenceError, SolverConfig, Trajectory, phi_map, solve_fixed_point
from .stress import (
    ScenarioResult,
    SweepRow,
    SweepSpec,
    classify_defaults,
    critical_points,
    curve,
    envelope,
    first_shock_reaching,
    run_scenario,
    shock_grid,
    sweep,
)
from .dataio import (
    NetworkFormatError,
    SyntheticSpec,
    generate_synthetic,
    load_network,
    save_network,
    save_results,
)

__version__ = "0.1.0"
