"""Monotone iteration for (-Δ)^s_{B1} u + u = h1 u^p + ε h2.

Starting from v0 = ε u_{h2}, each step solves the linear problem with source
h1 v^p + ε h2.  With h1, h2 >= 0 the iterates increase; below the constant
barrier t_p = (p‖h1‖∞)^{-1/(p-1)} they converge to the minimal solution.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .assembly import RadialProfile, assemble_operator, build_grid
from .errors import ConfigurationError, PreconditionError, VerificationFailure
from .kernel import FracOrder
from .poisson import shifted_solve
from .sources import sample

STEP_SLACK = 1e-10
BARRIER_SLACK = 1e-8
LEVEL_SLACK = 1e-8


@dataclass(frozen=True)
class SemilinearSpec:
    order: FracOrder
    nodes: int = 256
    beta: float = 2.0
    h1: object = "constant:1"
    h2: object = "constant:1"
    p: float = 2.0
    eps: float = 0.1
    tol: float = 1e-10
    max_iter: int = 500
    allow_degenerate: bool = False
    allow_large_s: bool = False

    def __post_init__(self):
        self.order.require_low_order(self.allow_large_s)
        if not self.p > 1.0:
            raise ConfigurationError(f"exponent p must exceed 1, got {self.p}")
        if not self.eps >= 0.0:
            raise ConfigurationError(f"ε must be nonnegative, got {self.eps}")
        if self.tol <= 0.0 or self.max_iter < 1:
            raise ConfigurationError("need positive tolerance and at least one iteration")

    def grid(self):
        for h in (self.h1, self.h2):
            if isinstance(h, RadialProfile):
                return h.grid
        return build_grid(self.nodes, self.beta, self.order.dim)

    def operator(self):
        return assemble_operator(self.grid(), self.order)

    def data(self, grid=None):
        """(h1, h2) sampled on the grid, validated."""
        grid = grid or self.grid()
        h1, h2 = sample(self.h1, grid), sample(self.h2, grid)
        for name, h in (("h1", h1), ("h2", h2)):
            if np.any(np.diff(h.values) > 1e-12):
                raise PreconditionError(f"{name} must be nonincreasing in r")
        if np.any(h1.values < 0.0) or np.any(h2.values < 0.0):
            raise PreconditionError("h1 and h2 must be nonnegative")
        degenerate = h1.values.min() <= 0.0 or h2.values.min() <= 0.0
        if degenerate and not self.allow_degenerate:
            raise PreconditionError("need inf h1 > 0 and inf h2 > 0")
        return h1, h2


@dataclass(frozen=True)
class Thresholds:
    t_p: float
    L_max: float
    eps_p: float
    eps_0: float
    eps_star_upper: float

    def as_dict(self):
        return {"t_p": self.t_p, "L_max": self.L_max, "eps_p": self.eps_p,
                "eps_0": self.eps_0, "eps_star_upper": self.eps_star_upper}


def thresholds(spec, u_h1, h1=None, h2=None):
    """Barrier height, existence thresholds and the upper bracket for ε*."""
    grid = u_h1.grid
    if h1 is None or h2 is None:
        h1, h2 = sample(spec.h1, grid), sample(spec.h2, grid)
    inf1, inf2 = float(h1.values.min()), float(h2.values.min())
    if inf1 <= 0.0 or inf2 <= 0.0:
        raise PreconditionError("thresholds need inf h1 > 0 and inf h2 > 0")
    if np.any(u_h1.values <= 0.0):
        raise PreconditionError("u_h1 must be strictly positive")
    p = spec.p
    m = grid.mass_weights
    vol = float(m.sum())
    sup1, sup2 = float(h1.values.max()), float(h2.values.max())
    t_p = (p * sup1) ** (-1.0 / (p - 1.0))
    l_max = (p - 1.0) / p * t_p
    l1 = float(np.dot(m, np.abs(h1.values)))
    eps_0 = l1 ** (1.0 / p) / (vol * inf2 * inf1)
    u = u_h1.values
    star = float(np.dot(m, h1.values * u ** (-1.0 / (p - 1.0))) / np.dot(m, h2.values * u))
    return Thresholds(t_p=t_p, L_max=l_max, eps_p=l_max / sup2, eps_0=eps_0, eps_star_upper=star)


@dataclass(frozen=True)
class IterationReport:
    solution: RadialProfile
    converged: bool
    status: str
    iterations: int
    deltas: tuple
    min_step: float
    max_value: float
    eps: float
    start: RadialProfile
    extras: dict = field(default_factory=dict)

    @property
    def boundary_level(self):
        return float(self.solution.values[-1])

    @property
    def monotone(self):
        return self.min_step >= -STEP_SLACK


def _iterate(op, h1, h2, spec, v, barrier=None):
    """Run the fixed-point map from v; returns (v, status, deltas, min_step, max_value)."""
    p, eps = spec.p, spec.eps
    deltas, min_step, max_val = [], math.inf, float(v.max())
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(spec.max_iter):
            rhs = h1 * v ** p + eps * h2
            if not np.all(np.isfinite(rhs)):
                return v, "overflow", deltas, min_step, max_val
            nxt = shifted_solve(op, rhs)
            step = nxt - v
            delta = float(np.abs(step).max())
            deltas.append(delta)
            min_step = min(min_step, float(step.min()))
            v = nxt
            max_val = max(max_val, float(v.max()))
            if barrier is not None and max_val > 10.0 * barrier:
                raise VerificationFailure(
                    f"iterates exceed 10 t_p although ε <= ε_p (max {max_val:.6g})",
                    measured=max_val, tolerance=10.0 * barrier,
                    reference="barrier bound for small ε")
            if not math.isfinite(delta):
                return v, "overflow", deltas, min_step, max_val
            if delta < spec.tol:
                return v, "converged", deltas, min_step, max_val
    return v, "max_iterations", deltas, min_step, max_val


def monotone_iteration(spec, op=None, start=None):
    """Increasing iteration v_n = (A + I)^{-1}(h1 v_{n-1}^p + ε h2).

    Non-convergence (ε above the existence range) is reported through
    ``status``; exceeding 10 t_p while ε <= ε_p raises VerificationFailure.
    """
    op = op or spec.operator()
    h1, h2 = spec.data(op.grid)
    v0 = spec.eps * shifted_solve(op, h2.values)
    if start is not None:
        v0 = np.asarray(start, dtype=float)
    barrier = None
    thr = None
    if h1.values.min() > 0.0 and h2.values.min() > 0.0:
        u_h1 = RadialProfile(op.grid, shifted_solve(op, h1.values))
        thr = thresholds(spec, u_h1, h1, h2)
        if spec.eps <= thr.eps_p:
            barrier = thr.t_p
    v, status, deltas, min_step, max_val = _iterate(op, h1.values, h2.values, spec, v0, barrier)
    return IterationReport(
        solution=RadialProfile(op.grid, v), converged=status == "converged", status=status,
        iterations=len(deltas), deltas=tuple(deltas),
        min_step=min_step if deltas else 0.0, max_value=max_val, eps=spec.eps,
        start=RadialProfile(op.grid, v0),
        extras={"thresholds": thr, "spec": spec, "operator": op})


def barrier_and_minimality(report, thr, spec=None, op=None):
    """Barrier u_ε <= t_p (when ε <= ε_p) and same limit from the start v0/2."""
    if not report.converged:
        raise PreconditionError("barrier and minimality checks need a converged iteration")
    spec = spec or report.extras["spec"]
    op = op or report.extras["operator"]
    flags = {}
    top = float(report.solution.values.max())
    if report.eps <= thr.eps_p:
        flags["barrier"] = top <= thr.t_p + BARRIER_SLACK
        if not flags["barrier"]:
            raise VerificationFailure(
                f"u_ε reaches {top!r} above t_p = {thr.t_p!r}",
                measured=top, tolerance=BARRIER_SLACK, reference="barrier bound for small ε")
    else:
        flags["barrier"] = None
    again = monotone_iteration(spec, op, start=report.start.values / 2.0)
    gap = float(np.abs(again.solution.values - report.solution.values).max())
    flags["minimality_gap"] = gap
    flags["minimality"] = again.converged and gap <= 2.0 * spec.tol
    return flags


@dataclass(frozen=True)
class BoundaryLevel:
    d: float
    lower: float
    upper: float
    shifted: RadialProfile
    within: bool


def boundary_level_bounds(report, spec, op=None):
    """d_ε = u_ε(1) within [ε inf h2, (‖h1‖_{L1}/(|B1| inf h1))^{1/p}]."""
    if not report.converged:
        raise PreconditionError("boundary level needs a converged iteration")
    grid = report.solution.grid
    h1, h2 = spec.data(grid)
    m = grid.mass_weights
    inf1 = float(h1.values.min())
    if inf1 <= 0.0:
        raise PreconditionError("upper bound needs inf h1 > 0")
    d = report.boundary_level
    lower = spec.eps * float(h2.values.min())
    upper = (float(np.dot(m, np.abs(h1.values))) / (float(m.sum()) * inf1)) ** (1.0 / spec.p)
    within = lower - LEVEL_SLACK <= d <= upper + LEVEL_SLACK
    shifted = report.solution.with_values(report.solution.values - d)
    if not within:
        raise VerificationFailure(
            f"boundary level {d!r} outside [{lower!r}, {upper!r}]",
            measured=d, tolerance=LEVEL_SLACK, reference="semilinear boundary level range")
    return BoundaryLevel(d=d, lower=lower, upper=upper, shifted=shifted, within=within)


def with_eps(spec, eps):
    return replace(spec, eps=eps)
