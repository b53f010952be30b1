"""Solvers and diagnostics for scalar conservation laws with a flux that
switches from g(u) (x < 0) to f(u) (x > 0) across a fixed interface.

The solution notion is the (A, B) interface entropy solution; it is computed
two independent ways: explicit Hopf-Lax-type formulas built on control-curve
optimization, and a monotone Godunov finite-volume scheme with a
connection-adapted interface flux.  Diagnostics measure total variation near
and away from the interface across grid refinements.
"""

from .errors import (
    BelowMinimum,
    BracketExceeded,
    ConfigError,
    DiscFluxError,
    GridMismatch,
    InvariantViolation,
    NoSignChange,
    OutOfRange,
    SignViolation,
    SlopeOutOfRange,
    TimeOrderViolation,
    UnknownScenario,
    UnstableBlowup,
)
from .fluxes import (
    Connection,
    ConvexFlux,
    FluxMinimizer,
    HypothesisReport,
    branch_inverse,
    builtin_flux,
    deriv_inverse,
    find_minimizer,
    legendre,
    make_connection,
    validate_connection,
    validate_hypotheses,
)
from .initial_data import (
    InitialProfile,
    constant,
    from_callable,
    from_piecewise_constant,
    from_samples,
    riemann,
    truncate_to_support,
)
from .curves import ControlCurve, cost_J, cost_Jpm, make_curve
from .interface import (
    InterfaceProfile,
    build_profile,
    compute_b,
    compute_bprime,
    compute_lambda,
)
from .solver import (
    DATA_FOOT,
    INTERFACE_FOOT,
    SolutionField,
    ValueSample,
    critical_chain_u,
    fronts,
    interface_traces,
    make_field_grid,
    solve_field,
    value_at,
)
from .godunov import (
    FVMState,
    evolve,
    godunov_flux,
    interface_flux,
    make_fvm_state,
)
from .diagnostics import (
    TVReport,
    cross_compare,
    refinement_study,
    series_verdict,
    total_variation,
    tv_regions,
)
from .scenarios import (
    Scenario,
    builtin,
    builtin_names,
    compact_support_data,
    from_spec,
    oscillatory_data,
    realize_data,
)
from .pipeline import exact_field, fvm_solution, scenario_profile

__version__ = "0.1.0"
