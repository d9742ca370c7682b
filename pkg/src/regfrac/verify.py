"""Numerical checks of the qualitative properties the solvers must respect.

Every check returns a CheckResult; failures carry the measured value, the
tolerance and the name of the property tested.  ``run_suite`` runs all of them
for one configuration and lists skipped checks with a reason.
"""

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.integrate

from .assembly import (RadialProfile, assemble_operator, build_grid, dyda_profile,
                       extension_identity_residual)
from .errors import RegfracError, VerificationFailure
from .kernel import FracOrder, KernelEvaluator, dyda_constant, phi_boundary_constant
from .poisson import PoissonSpec, energy_functional, exhaustion_study, is_nonconstant, \
    shift_and_mass, shifted_solve, solve_full, solve_truncated
from .rng import DEFAULT_SEED, Xoshiro256
from .semilinear import (SemilinearSpec, barrier_and_minimality, boundary_level_bounds,
                         monotone_iteration, thresholds)
from .special import sphere_area

PASS, FAIL, INCONCLUSIVE, SKIPPED = "pass", "fail", "inconclusive", "skipped"


@dataclass
class CheckResult:
    name: str
    status: str
    measured: object = None
    tolerance: object = None
    principle: str = ""
    detail: dict = field(default_factory=dict)
    runtime: float = 0.0

    def as_dict(self, timings=False):
        out = {"name": self.name, "status": self.status, "measured": self.measured,
               "tolerance": self.tolerance, "principle": self.principle}
        if self.detail:
            out["detail"] = self.detail
        if timings:
            out["runtime"] = self.runtime
        return out


def _status(ok):
    return PASS if ok else FAIL


def comparison_check(op, r0, trials=20, seed=DEFAULT_SEED, sources=None):
    """Nonnegative sources give nonnegative truncated solutions."""
    keep = int(np.count_nonzero(op.grid.nodes < r0))
    if sources is None:
        rng = Xoshiro256(seed)
        sources = [rng.uniform(0.0, 1.0, op.grid.node_count) for _ in range(trials)]
    worst = math.inf
    for g in sources:
        g = np.asarray(g, dtype=float).copy()
        g[keep:] = 0.0
        worst = min(worst, float(shifted_solve(op, g, keep)[:keep].min()))
    return CheckResult(f"comparison_principle[r0={r0!r}]", _status(worst >= -1e-10),
                       worst, -1e-10, "comparison principle",
                       {"trials": len(sources), "retained_nodes": keep})


def central_disk_sets(grid, fractions=(0.2, 0.02, 0.002)):
    """Node sets {r_i < ρ} whose dual-cell ball measure is closest below f|B1|."""
    cells = grid.dual_cell_measures()
    total = cells.sum()
    cum = np.cumsum(cells)
    sets = []
    for f in fractions:
        n = int(np.count_nonzero(cum <= f * total * (1 + 1e-12)))
        sets.append(np.arange(n))
    return sets


def abp_scaling_check(op, sets=None, seed=DEFAULT_SEED, trials=8, spread_limit=10.0):
    """Boundedness of -inf w / (‖g‖∞ |O|^{2s/N}) across shrinking sets O.

    w solves the operator restricted to O with w = 0 outside O, for random g
    with both signs; the worst trial per set is kept.
    """
    grid, order = op.grid, op.order
    sets = central_disk_sets(grid) if sets is None else sets
    cells = grid.dual_cell_measures()
    expo = 2.0 * order.s / order.dim
    rng = Xoshiro256(seed)
    ratios, measures, skipped = [], [], []
    for idx in sets:
        idx = np.asarray(idx, dtype=int)
        meas = float(cells[idx].sum()) if idx.size else 0.0
        if idx.size == 0 or meas <= 0.0:
            skipped.append("degenerate set of measure 0")
            continue
        if idx.size == grid.node_count:
            skipped.append("set covers the whole ball")
            continue
        sub = op.entries[np.ix_(idx, idx)]
        best = 0.0
        for _ in range(trials):
            g = rng.uniform(-1.0, 1.0, idx.size)
            w = np.linalg.solve(sub, g)
            best = max(best, -min(float(w.min()), 0.0) / (np.abs(g).max() * meas ** expo))
        ratios.append(best)
        measures.append(meas)
    if len(ratios) < 2:
        return CheckResult("abp_scaling", SKIPPED, None, spread_limit, "small-domain ABP bound",
                           {"reason": "fewer than two usable sets", "skipped": skipped})
    spread = max(ratios) / max(min(ratios), np.finfo(float).tiny)
    return CheckResult("abp_scaling", _status(spread <= spread_limit), spread, spread_limit,
                       "small-domain ABP bound",
                       {"ratios": ratios, "measures": measures, "skipped": skipped})


def radial_monotonicity_check(u, strict_interior=False, source=None, name="radial_monotonicity",
                              band=(0.05, 0.95)):
    """Nodal profile nonincreasing in r; optionally strictly decreasing on the band."""
    du = np.diff(u.values)
    worst = float(du.max())
    ok = worst <= 1e-10
    detail = {}
    if strict_interior:
        constant = not is_nonconstant(source if source is not None else u)
        r = u.grid.nodes
        inside = (r[:-1] >= band[0]) & (r[1:] <= band[1])
        worst_band = float(du[inside].max()) if inside.any() else math.nan
        detail["strict_band_max_difference"] = worst_band
        if constant:
            detail["reason"] = "constant source"
            ok = False
        else:
            ok = ok and worst_band < -1e-12
    return CheckResult(name, _status(ok), worst, 1e-10, "radial monotonicity", detail)


def dyda_oracle_check(order, m_list, beta=2.0, limit_fraction=1e-2, min_ratio=1.7):
    """Extension identity against (-Δ)^s(1-r²)_+^s = B(N,s) on r <= 0.9."""
    m_list = list(m_list)
    if any(b <= a for a, b in zip(m_list, m_list[1:])):
        raise ValueError("M list must be increasing")
    ke = KernelEvaluator(order)
    big_b = dyda_constant(order)
    res = []
    for m in m_list:
        grid = build_grid(m, beta, order.dim)
        op = assemble_operator(grid, order)
        res.append(extension_identity_residual(op, ke, dyda_profile(grid, order.s)))
    ratios = [a / b for a, b in zip(res, res[1:])]
    orders = [math.log2(r) for r in ratios]
    ok = res[-1] <= limit_fraction * big_b and all(r >= min_ratio for r in ratios[-1:])
    return CheckResult("dyda_oracle", _status(ok), res[-1], limit_fraction * big_b,
                       "extension identity",
                       {"M": m_list, "residuals": res, "ratios": ratios,
                        "empirical_orders": orders, "B": big_b, "min_ratio": min_ratio})


def scalar_fixed_point(a, b, p, eps, tol=1e-15, max_iter=100000):
    """Minimal root of c = a c^p + eps b by the increasing scalar iteration."""
    c = 0.0
    for _ in range(max_iter):
        if c > 1e100:
            return math.nan
        nxt = a * c ** p + eps * b
        if abs(nxt - c) <= tol:
            return nxt
        c = nxt
    return math.nan


def _timed(fn):
    t = time.perf_counter()
    try:
        out = fn()
    except VerificationFailure as exc:
        out = CheckResult(getattr(fn, "check_name", "check"), FAIL, exc.measured, exc.tolerance,
                          exc.reference or "", {"error": str(exc)})
    except RegfracError as exc:
        out = CheckResult(getattr(fn, "check_name", "check"), FAIL, None, None, "",
                          {"error": str(exc)})
    results = out if isinstance(out, list) else [out]
    dt = time.perf_counter() - t
    for r in results:
        r.runtime = dt / len(results)
    return results


def _named(name, fn):
    fn.check_name = name
    return fn


def run_suite(cfg):
    """All checks for one configuration; returns a list of CheckResult."""
    order = FracOrder(cfg.s, cfg.dim)
    order.require_low_order(cfg.allow_large_s)
    ke = KernelEvaluator(order)
    grid = build_grid(cfg.nodes, cfg.beta, cfg.dim)
    op = assemble_operator(grid, order)
    pspec = PoissonSpec(order, cfg.nodes, cfg.beta, cfg.source, allow_large_s=cfg.allow_large_s)
    checks = []
    add = checks.extend

    def kernel_anchors():
        phi0 = ke.phi_raw(0.0)
        exact = sphere_area(order.dim - 1) / (2 * order.s)
        rel0 = abs(phi0 - exact) / exact
        n, s = order.dim, order.s
        quad = scipy.integrate.quad(
            lambda t: t ** (n - 2) * (1 + t * t) ** (-(n + 2 * s) / 2), 0, math.inf,
            epsabs=0, epsrel=1e-13, limit=500)[0]
        c1_quad = sphere_area(n - 2) * quad / (2 * s)
        rel1 = abs(phi_boundary_constant(order) - c1_quad) / c1_quad
        return [
            CheckResult("kernel_origin_value", _status(rel0 <= 1e-8), rel0, 1e-8,
                        "killing potential at the origin", {"phi0": phi0, "exact": exact}),
            CheckResult("boundary_constant", _status(rel1 <= 1e-6), rel1, 1e-6,
                        "boundary constant by independent quadrature",
                        {"c1": phi_boundary_constant(order), "quadrature": c1_quad}),
        ]

    def boundary_asymptotics():
        # the correction term is O((1-r)^{1-2s}), so the ratio must approach 1
        gaps = [1e-3, 1e-4, 1e-5, 1e-6]
        c1 = phi_boundary_constant(order)
        dev = [abs(ke.phi_raw(1.0 - g) * g ** (2 * order.s) / c1 - 1.0) for g in gaps]
        ok = dev[-1] <= 0.02 and all(b < a for a, b in zip(dev, dev[1:]))
        return CheckResult("boundary_asymptotics", _status(ok), dev[-1], 0.02,
                           "killing potential boundary blow-up rate",
                           {"1-r": gaps, "deviation": dev})

    def structure():
        rows = op.row_sum_defect()
        off = op.max_offdiagonal()
        diag = float(np.diag(op.entries).min())
        return [
            CheckResult("operator_row_sums", _status(rows <= 1e-12), rows, 1e-12,
                        "constants are annihilated"),
            CheckResult("operator_sign_pattern", _status(off <= 0.0 and diag > 0.0), off, 0.0,
                        "Z-matrix structure", {"min_diagonal": diag}),
        ]

    def constants():
        c = 3.0
        rep = solve_full(replace(pspec, source=f"constant:{c!r}"), op)
        err = float(np.abs(rep.solution.values - c).max())
        return CheckResult("constant_reproduction", _status(err <= 1e-10 * c), err, 1e-10 * c,
                           "constant sources reproduce themselves")

    def dyda():
        ms = [m for m in (cfg.nodes // 2, cfg.nodes) if m >= 8]
        return dyda_oracle_check(order, ms, cfg.beta)

    def mass():
        rep = solve_full(pspec, op)
        F = rep.source
        if not is_nonconstant(F):
            return [CheckResult("mass_identity", SKIPPED, None, None, "mass identity",
                                {"reason": "constant source"}),
                    CheckResult("boundary_level_range", SKIPPED, None, None,
                                "boundary level range", {"reason": "constant source"})]
        shifted = shift_and_mass(rep, F)
        tol = 1e-6 * shifted.mass_scale
        lo, avg = shifted.monotonicity_flags["level_interval"]
        d = shifted.boundary_level
        upper = shifted.monotonicity_flags["level_upper"]
        status = FAIL if shifted.monotonicity_flags["level_lower"] != PASS else (
            INCONCLUSIVE if upper == INCONCLUSIVE else PASS)
        return [CheckResult("mass_identity", _status(shifted.mass_residual <= tol),
                            shifted.mass_residual, tol, "mass identity"),
                CheckResult("boundary_level_range", status, d, 1e-8, "boundary level range",
                            {"inf_F": lo, "mean_F": avg})]

    def exhaustion():
        study = exhaustion_study(pspec, (0.5, 0.75, 0.9, 0.99), op)
        return [CheckResult("exhaustion_monotone", _status(study.all_monotone),
                            list(study.monotone), 1e-8, "truncated solutions grow with r0",
                            {"radii": list(study.radii)}),
                CheckResult("exhaustion_convergence", _status(study.distances_decreasing),
                            list(study.distances), None, "truncated solutions approach the full one",
                            {"radii": list(study.radii)})]

    def comparison():
        radii = cfg.r0 or [0.8]
        return [comparison_check(op, r, cfg.trials, cfg.seed) for r in radii]

    def abp():
        return abp_scaling_check(op, seed=cfg.seed)

    def monotone_full():
        rep = solve_full(pspec, op)
        return radial_monotonicity_check(rep.solution, is_nonconstant(rep.source), rep.source,
                                         name="radial_monotonicity_full")

    def energy():
        rep = solve_full(pspec, op)
        base = rep.energy
        rng = Xoshiro256(cfg.seed)
        worst = math.inf
        for _ in range(10):
            k = int(rng.random() * grid.node_count)
            delta = 1e-3 if rng.random() < 0.5 else -1e-3
            v = rep.solution.values.copy()
            v[k] += delta
            worst = min(worst, energy_functional(RadialProfile(grid, v), rep.source, op) - base)
        tol = -1e-13 * max(1.0, abs(base))
        return CheckResult("energy_minimality", _status(worst >= tol), worst, tol,
                           "solution minimizes the energy")

    def semilinear():
        out = []
        base = SemilinearSpec(order, cfg.nodes, cfg.beta, cfg.h1, cfg.h2, cfg.p, 0.0,
                              allow_large_s=cfg.allow_large_s)
        h1, h2 = base.data(grid)
        u_h1 = RadialProfile(grid, shifted_solve(op, h1.values))
        thr = thresholds(base, u_h1, h1, h2)
        out.append(CheckResult("semilinear_thresholds",
                               _status(all(v > 0 for v in thr.as_dict().values())),
                               thr.as_dict(), None, "explicit existence thresholds"))
        const = not is_nonconstant(h1) and not is_nonconstant(h2)
        for eps in cfg.eps:
            tag = f"[eps={eps!r}]"
            spec = replace(base, eps=eps)
            rep = monotone_iteration(spec, op)
            out.append(CheckResult("semilinear_convergence" + tag,
                                   PASS if rep.converged else INCONCLUSIVE, rep.iterations, None,
                                   "monotone iteration converges",
                                   {"status": rep.status, "deltas": list(rep.deltas)}))
            out.append(CheckResult("semilinear_monotone_iterates" + tag, _status(rep.monotone),
                                   rep.min_step, -1e-10, "iterates increase"))
            if not rep.converged:
                for nm in ("barrier", "minimality", "boundary_level", "radial_monotonicity"):
                    out.append(CheckResult(f"semilinear_{nm}" + tag, SKIPPED, None, None, "",
                                           {"reason": f"iteration status {rep.status}"}))
                continue
            flags = barrier_and_minimality(rep, thr, spec, op)
            if flags["barrier"] is None:
                out.append(CheckResult("semilinear_barrier" + tag, SKIPPED, None, None,
                                       "barrier bound for small ε", {"reason": "ε > ε_p"}))
            else:
                out.append(CheckResult("semilinear_barrier" + tag, _status(flags["barrier"]),
                                       float(rep.solution.values.max()), thr.t_p,
                                       "barrier bound for small ε"))
            out.append(CheckResult("semilinear_minimality" + tag, _status(flags["minimality"]),
                                   flags["minimality_gap"], 2 * spec.tol,
                                   "minimal solution is reached from below"))
            lvl = boundary_level_bounds(rep, spec)
            out.append(CheckResult("semilinear_boundary_level" + tag, _status(lvl.within), lvl.d,
                                   1e-8, "semilinear boundary level range",
                                   {"lower": lvl.lower, "upper": lvl.upper}))
            out.append(radial_monotonicity_check(
                rep.solution, not const, None if const else rep.solution,
                name="semilinear_radial_monotonicity" + tag))
            if const:
                c = scalar_fixed_point(float(h1.values[0]), float(h2.values[0]), spec.p, eps)
                err = float(np.abs(rep.solution.values - c).max())
                out.append(CheckResult("semilinear_fixed_point" + tag, _status(err <= 1e-6), err,
                                       1e-6, "constant data give the scalar fixed point",
                                       {"scalar_root": c}))
        low = monotone_iteration(replace(base, eps=thr.eps_p / 2), op)
        high = monotone_iteration(replace(base, eps=10 * thr.eps_star_upper, max_iter=200), op)
        ok = low.converged and not high.converged
        out.append(CheckResult("semilinear_threshold_ordering", _status(ok),
                               {"eps_p/2": low.status, "10*eps_star_upper": high.status}, None,
                               "existence below ε_p, none far above the ε* bracket"))
        return out

    for name, fn in [("kernel_anchors", kernel_anchors), ("boundary_asymptotics", boundary_asymptotics),
                     ("operator_structure", structure), ("constant_reproduction", constants),
                     ("dyda_oracle", dyda), ("mass_identity", mass), ("exhaustion", exhaustion),
                     ("comparison_principle", comparison), ("abp_scaling", abp),
                     ("radial_monotonicity_full", monotone_full), ("energy_minimality", energy),
                     ("semilinear", semilinear)]:
        add(_timed(_named(name, fn)))
    return checks


def summarize(checks):
    counts = {k: 0 for k in (PASS, FAIL, INCONCLUSIVE, SKIPPED)}
    for c in checks:
        counts[c.status] += 1
    return {"counts": counts, "passed": counts[FAIL] == 0, "total": len(checks)}
