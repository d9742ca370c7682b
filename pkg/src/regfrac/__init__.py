"""Regional fractional Laplacian on the unit ball: radial solvers and checks."""

from .assembly import (OperatorMatrix, RadialGrid, RadialProfile, apply_operator,
                       assemble_operator, build_grid, extension_identity_residual)
from .errors import (ConfigurationError, DomainError, PreconditionError, RegfracError,
                     SingularityError, SolverError, VerificationFailure)
from .kernel import FracOrder, KernelEvaluator, normalization_constant
from .poisson import (PoissonSpec, SolveReport, energy_functional, exhaustion_study,
                      shift_and_mass, solve_full, solve_truncated)
from .semilinear import (SemilinearSpec, Thresholds, barrier_and_minimality,
                         boundary_level_bounds, monotone_iteration, thresholds)

__version__ = "0.1.0"
