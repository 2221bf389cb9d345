"""Numerical laboratory for finite-time blow-up in two radial heat problems:
an interior exponential source with a cold wall, and an insulated interior
with an exponential boundary flux."""

from .analysis import (MonitorReport, RateFit, check_pointwise_bound,
                       estimate_blowup_set, estimate_blowup_time, fit_rate,
                       monitor_gradient_bound, monitor_growth_dirichlet,
                       monitor_growth_neumann, monitor_monotonicity,
                       tail_integral, theory_slope, window_indices)
from .config import ExperimentConfig, config_from_mapping, load_config
from .errors import (BlowupLabError, ConfigError, FamilyMismatchError,
                     NegativeInputError, NoRootError, NotBlownUpError,
                     PreconditionFailedError, SourceOverflowError,
                     ThresholdNeverReachedError, ValidationError,
                     WindowTooSmallError)
from .grid import (FixedValueEdge, FluxEdge, RadialGrid, build_grid,
                   radial_laplacian)
from .problem import (LOG_OVERFLOW, InitialData, PolynomialBump, ProblemKind,
                      ProblemSpec, QuadraticNeumann, ValidationReport,
                      solve_neumann_curvature, source_slope, source_value,
                      validate_dirichlet_ic, validate_neumann_ic)
from .runner import RunSummary, execute, run_experiment, run_sweep
from .solver import (RunResult, RunTrace, SolutionState, SolverConfig,
                     StopReason, TraceFlags, adaptive_dt,
                     default_stop_threshold, integrate,
                     integrate_reaction_only, rhs_dirichlet, rhs_neumann)

__version__ = "0.1.0"
