"""Forwarding feedback for a transport equation driven by a saturated ODE.

A scalar state z with cone-bounded input feeds the inflow boundary of a
unit-interval transport equation.  The package provides the explicit
feedback gain, three independent time integrators (exact characteristics,
upwind finite differences, backward Euler through the nonlinear resolvent),
and a verification harness for the energy-decay and limit-set properties of
the closed loop.
"""

from .errors import CFLError, ConfigError, HistoryGapError, NumericalError
from .model import (
    Arctan,
    ConeBounded,
    GainProfile,
    Grid,
    Linear,
    Params,
    Saturation,
    State,
    build_gain,
    compatibility_defect,
    gain_residual,
    is_compatible,
    make_sigma,
    random_compatible_state,
    random_fundamental_state,
)
from .spaces import (
    Quadrature,
    energy_e1,
    energy_e2,
    feedback_u,
    h1_seminorm_sq,
    l2_inner,
    norm_equivalence_bounds,
    state_norm_sq,
    x_inner,
)
from .profiles import as_profile, parse_profile
from .characteristics import (
    BoundaryHistory,
    CharSolverConfig,
    make_history,
    reconstruct_w,
)
from .characteristics import solve as solve_characteristics
from .characteristics import step as step_characteristics
from .upwind import semidiscrete_rhs, step_rk4
from .upwind import solve as solve_upwind
from .generator import (
    ResolventProblem,
    apply_generator,
    dissipativity_gap,
    implicit_step,
    resolvent_solve,
    solve_implicit,
)
from .trajectory import RunSummary, Snapshot, Trajectory, read_csv, summarize, write_csv
from .harness import (
    PRESETS,
    CompareReport,
    ExperimentConfig,
    LasalleReport,
    compare,
    lasalle_check,
    parse_config,
    preset_config,
    run,
    zero_inflow_energies,
)

__version__ = "0.1.0"
