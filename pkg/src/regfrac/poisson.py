"""Linear problems (A + I) u = F on the ball and on truncated balls.

The full problem has no boundary pin: for s <= 1/2 constants belong to the
energy space, so F ≡ c gives u ≡ c.  The truncated problem keeps the nodes
with r_i < r0 and pins u = 0 on the rest.  ``shift_and_mass`` turns the full
solution into the zero-boundary solution of the shifted problem and checks
that the shift preserves mass.
"""

import weakref
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .assembly import RadialProfile, assemble_operator, build_grid
from .errors import ConfigurationError, PreconditionError, SolverError, VerificationFailure
from .kernel import FracOrder, KernelEvaluator
from .sources import sample

MONOTONE_SLACK = 1e-8
LEVEL_SLACK = 1e-8
NONCONSTANT_GAP = 1e-12

_LU = weakref.WeakKeyDictionary()


@dataclass(frozen=True)
class PoissonSpec:
    order: FracOrder
    nodes: int = 256
    beta: float = 2.0
    source: object = "constant:1"
    r0: float = 1.0
    tol: float = 1e-9
    allow_large_s: bool = False

    def __post_init__(self):
        self.order.require_low_order(self.allow_large_s)
        if not (0.0 < self.r0 <= 1.0):
            raise ConfigurationError(f"truncation radius must lie in (0, 1], got {self.r0}")
        if self.tol <= 0.0:
            raise ConfigurationError("solver tolerance must be positive")

    def grid(self):
        if isinstance(self.source, RadialProfile):
            return self.source.grid
        return build_grid(self.nodes, self.beta, self.order.dim)

    def operator(self):
        return assemble_operator(self.grid(), self.order)

    def source_profile(self, grid=None):
        return sample(self.source, grid or self.grid())


@dataclass(frozen=True)
class SolveReport:
    solution: RadialProfile
    source: RadialProfile
    r0: float
    boundary_level: float
    linear_residual: float
    energy: float
    mass_residual: float = float("nan")
    mass_scale: float = float("nan")
    monotonicity_flags: dict = field(default_factory=dict)
    shifted_solution: RadialProfile = None
    shifted_source: RadialProfile = None
    extras: dict = field(default_factory=dict)

    def summary(self, order):
        g = self.solution.grid
        return {
            "s": order.s, "dim": order.dim, "M": g.m, "beta": g.beta, "r0": self.r0,
            "d": self.boundary_level, "mass_residual": self.mass_residual,
            "linear_residual": self.linear_residual, "energy": self.energy,
        }


def _factor(op, keep):
    per_op = _LU.setdefault(op, {})
    lu = per_op.get(keep)
    if lu is None:
        sub = op.entries[:keep, :keep] + np.eye(keep)
        lu = scipy.linalg.lu_factor(sub, check_finite=True)
        if not np.all(np.isfinite(lu[0])) or np.any(np.diag(lu[0]) == 0.0):
            raise SolverError("factorization of the shifted operator failed")
        per_op[keep] = lu
    return lu


def shifted_solve(op, rhs, keep=None):
    """Solve (A + I) u = rhs on the first ``keep`` nodes, u = 0 on the rest."""
    n = op.grid.node_count
    keep = n if keep is None else keep
    u = np.zeros(n)
    u[:keep] = scipy.linalg.lu_solve(_factor(op, keep), rhs[:keep])
    if not np.all(np.isfinite(u)):
        raise SolverError("linear solve produced non-finite values")
    return u


def _check_source(F):
    if np.any(F.values < 0.0):
        raise PreconditionError(f"source must be nonnegative, min = {F.values.min():.3e}")


def _monotone_flags(u):
    du = np.diff(u.values)
    return {"nonincreasing": bool(np.all(du <= 1e-10)), "max_increment": float(du.max())}


def _solve(spec, op, keep, F):
    u = shifted_solve(op, F.values, keep)
    lhs = op.entries[:keep] @ u + u[:keep]
    resid = float(np.abs(lhs - F.values[:keep]).max() / max(1.0, np.abs(F.values).max()))
    if resid > spec.tol:
        raise SolverError(f"linear residual {resid:.3e} exceeds tolerance {spec.tol:.1e}")
    sol = RadialProfile(op.grid, u)
    return SolveReport(
        solution=sol, source=F, r0=spec.r0, boundary_level=float(u[-1]),
        linear_residual=resid, energy=energy_functional(sol, F, op),
        monotonicity_flags=_monotone_flags(sol))


def solve_truncated(spec, op=None):
    """(A + I) u = F on nodes r_i < r0, u = 0 on r_i >= r0."""
    if spec.r0 >= 1.0:
        raise ConfigurationError("solve_truncated needs r0 < 1; use solve_full")
    op = op or spec.operator()
    F = spec.source_profile(op.grid)
    _check_source(F)
    keep = int(np.count_nonzero(op.grid.nodes < spec.r0))
    return _solve(spec, op, keep, F)


def solve_full(spec, op=None):
    """(A + I) u = F on every node, no boundary pin."""
    if spec.r0 != 1.0:
        raise ConfigurationError("solve_full needs r0 = 1; use solve_truncated")
    op = op or spec.operator()
    F = spec.source_profile(op.grid)
    _check_source(F)
    return _solve(spec, op, op.grid.node_count, F)


def is_nonconstant(F):
    return float(F.values.max() - F.values.min()) > NONCONSTANT_GAP


def shift_and_mass(report, F=None, tol=LEVEL_SLACK):
    """Shift by d = u(1): u_f = u - d solves the problem with f = F - d.

    Records |∫u_f - ∫f| and, for non-constant F, checks inf F <= d < avg F.
    """
    F = F or report.source
    u = report.solution
    if F.grid != u.grid:
        raise ConfigurationError("source and solution live on different grids")
    if report.r0 != 1.0:
        raise PreconditionError("shift_and_mass needs a full-ball solution")
    d = float(u.values[-1])
    uf = u.with_values(u.values - d)
    f = F.with_values(F.values - d)
    mass_res = abs(uf.ball_integral() - f.ball_integral())
    scale = float(np.dot(u.grid.mass_weights, np.abs(f.values)))
    flags = dict(report.monotonicity_flags)
    if is_nonconstant(F):
        lo = float(F.values.min())
        avg = F.ball_integral() / float(u.grid.mass_weights.sum())
        flags["level_lower"] = "pass" if d >= lo - tol else "fail"
        if d < avg - tol:
            flags["level_upper"] = "pass"
        elif d <= avg + tol:
            flags["level_upper"] = "inconclusive"
        else:
            flags["level_upper"] = "fail"
        flags["level_interval"] = (lo, avg)
        if flags["level_lower"] == "fail" or flags["level_upper"] == "fail":
            raise VerificationFailure(
                f"boundary level {d!r} outside [{lo!r}, {avg!r})",
                measured=d, tolerance=tol, reference="boundary level range")
    return replace(report, boundary_level=d, mass_residual=mass_res, mass_scale=scale,
                   monotonicity_flags=flags, shifted_solution=uf, shifted_source=f)


@dataclass(frozen=True)
class ExhaustionResult:
    radii: tuple
    reports: tuple
    full: SolveReport
    monotone: tuple
    distances: tuple

    @property
    def all_monotone(self):
        return all(self.monotone)

    @property
    def distances_decreasing(self):
        return all(b < a for a, b in zip(self.distances, self.distances[1:]))


def exhaustion_study(spec, radii, op=None):
    """Truncated solves along increasing radii, compared with the full solve."""
    radii = tuple(float(r) for r in radii)
    if not radii:
        raise ConfigurationError("need at least one radius")
    if any(not (0.0 < r < 1.0) for r in radii):
        raise ConfigurationError("exhaustion radii must lie in (0, 1)")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ConfigurationError("exhaustion radii must be strictly increasing")
    op = op or spec.operator()
    reports = tuple(solve_truncated(replace(spec, r0=r), op) for r in radii)
    full = solve_full(replace(spec, r0=1.0), op)
    monotone = tuple(
        bool(np.all(a.solution.values <= b.solution.values + MONOTONE_SLACK))
        for a, b in zip(reports, reports[1:]))
    distances = tuple(
        float(np.abs(rep.solution.values - full.solution.values).max()) for rep in reports)
    return ExhaustionResult(radii, reports, full, monotone, distances)


def energy_functional(u, F, operator):
    """½<u, (-Δ)^s_{B1} u> + ½∫u² - ∫F u for the discrete problem.

    The quadratic form is m-weighted against the assembled table, whose
    symmetrized off-diagonal part is the paired near-diagonal quadrature of
    (c/4)∬(u(x)-u(y))²|x-y|^{-N-2s}.  Its exact minimizer solves (A + I)u = F.
    ``operator`` is an OperatorMatrix or a KernelEvaluator (assembled on u's grid).
    """
    if u.grid != F.grid:
        raise ConfigurationError("u and F live on different grids")
    if isinstance(operator, KernelEvaluator):
        operator = assemble_operator(u.grid, operator.order)
    if operator.grid != u.grid:
        raise ConfigurationError("operator lives on a different grid")
    m = u.grid.mass_weights
    v = u.values
    form = float(np.dot(m * v, operator.entries @ v))
    return 0.5 * form + 0.5 * float(np.dot(m, v * v)) - float(np.dot(m, F.values * v))
