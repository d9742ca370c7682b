"""Command-line entry point.

    regfrac phi --s 0.25 --dim 2
    regfrac poisson --source constant:3 --s 0.5 --dim 2 --format csv
    regfrac semilinear --eps 0.1 --p 2 --h1 constant:1 --h2 constant:1
    regfrac verify --s 0.25 --dim 2 --nodes 256 --out report.json
    regfrac convergence --s 0.5 --dim 2 --nodes 256

Exit status: 0 success, 1 verification failure, 2 configuration error.
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io
from .assembly import (RadialProfile, assemble_operator, build_grid, dyda_profile,
                       extension_identity_residual, relative_band_change)
from .config import COMMANDS, RunConfig, load_config_file
from .errors import ConfigurationError, DomainError, PreconditionError, RegfracError, \
    VerificationFailure
from .kernel import FracOrder, KernelEvaluator, dyda_constant, normalization_constant, \
    phi_boundary_constant
from .poisson import PoissonSpec, shift_and_mass, shifted_solve, solve_full, solve_truncated
from .semilinear import SemilinearSpec, barrier_and_minimality, boundary_level_bounds, \
    monotone_iteration, thresholds
from .verify import run_suite, summarize


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="regfrac", description="Regional fractional Laplacian solvers on the unit ball.")
    p.add_argument("command", nargs="?", choices=COMMANDS)
    p.add_argument("--s", type=float)
    p.add_argument("--dim", type=int)
    p.add_argument("--nodes", type=int, help="grid size M (M+1 nodes)")
    p.add_argument("--beta", type=float, help="grading exponent")
    p.add_argument("--r0", type=float, action="append", help="truncation radius (repeatable)")
    p.add_argument("--eps", type=float, action="append", help="ε value (repeatable)")
    p.add_argument("--p", type=float)
    p.add_argument("--source", help="constant:c | two-minus-r-squared | gaussian:a,b | file.csv")
    p.add_argument("--h1")
    p.add_argument("--h2")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int, help="random trials per comparison check")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--allow-large-s", action="store_true", default=None)
    p.add_argument("--timings", action="store_true", default=None,
                   help="include runtimes in the verify report (breaks byte-identity)")
    p.add_argument("--config", help="JSON file with RunConfig fields; flags override")
    return p


def config_from_args(argv):
    args = build_parser().parse_args(argv)
    data = load_config_file(args.config) if args.config else {}
    for key, val in vars(args).items():
        if key != "config" and val is not None:
            data[key] = val
    if "command" not in data:
        raise ConfigurationError("a command is required: " + ", ".join(COMMANDS))
    return RunConfig.from_mapping(data)


def _outputs(cfg, tags):
    """One output path per tag; None means stdout."""
    if cfg.out is None:
        return [None] * len(tags)
    if len(tags) == 1:
        return [cfg.out]
    path = Path(cfg.out)
    return [str(path.with_name(f"{path.stem}.{t}{path.suffix}")) for t in tags]


def _order(cfg):
    order = FracOrder(cfg.s, cfg.dim)
    order.require_low_order(cfg.allow_large_s)
    return order


def cmd_phi(cfg):
    order = _order(cfg)
    ke = KernelEvaluator(order)
    grid = build_grid(cfg.nodes, cfg.beta, cfg.dim)
    r = grid.nodes[:-1]
    phi = ke.phi_raw(r)
    killing = normalization_constant(order) * phi
    if cfg.format == "csv":
        io.emit(io.csv_text(["r", "phi", "killing_potential"], [r, phi, killing]), cfg.out)
    else:
        io.emit(io.json_text({
            "config": cfg.as_dict(), "c_ns": normalization_constant(order),
            "c1": phi_boundary_constant(order), "phi": {"r": r, "phi": phi,
                                                        "killing_potential": killing}}), cfg.out)
    return 0


def cmd_poisson(cfg):
    order = _order(cfg)
    base = PoissonSpec(order, cfg.nodes, cfg.beta, cfg.source, allow_large_s=cfg.allow_large_s)
    op = base.operator()
    radii = cfg.r0 or [1.0]
    tags = [f"r0-{r!r}" for r in radii]
    results, status = [], 0
    for r0, path in zip(radii, _outputs(cfg, tags)):
        spec = replace(base, r0=r0)
        if r0 < 1.0:
            rep = solve_truncated(spec, op)
        else:
            rep = solve_full(spec, op)
            try:
                rep = shift_and_mass(rep)
            except VerificationFailure as exc:
                print(f"verification failure: {exc}", file=sys.stderr)
                status = 1
        if cfg.format == "csv":
            io.emit(io.csv_text(["r", "u", "F"], [op.grid.nodes, rep.solution.values,
                                                  rep.source.values]), path)
        else:
            entry = rep.summary(order)
            entry["monotonicity"] = {k: v for k, v in rep.monotonicity_flags.items()}
            entry["profile"] = {"r": op.grid.nodes, "u": rep.solution.values, "F": rep.source.values}
            results.append(entry)
    if cfg.format == "json":
        io.emit(io.json_text({"config": cfg.as_dict(), "solves": results}), cfg.out)
    return status


def cmd_semilinear(cfg):
    order = _order(cfg)
    base = SemilinearSpec(order, cfg.nodes, cfg.beta, cfg.h1, cfg.h2, cfg.p, cfg.eps[0],
                          allow_large_s=cfg.allow_large_s)
    op = base.operator()
    h1, h2 = base.data(op.grid)
    u_h1 = RadialProfile(op.grid, shifted_solve(op, h1.values))
    thr = thresholds(base, u_h1, h1, h2)
    status = 0
    runs = []
    tags = [f"eps-{e!r}" for e in cfg.eps]
    for eps, path in zip(cfg.eps, _outputs(cfg, tags)):
        spec = replace(base, eps=eps)
        entry = {"eps": eps}
        try:
            rep = monotone_iteration(spec, op)
            entry.update(status=rep.status, iterations=rep.iterations, deltas=list(rep.deltas),
                         min_step=rep.min_step)
            if rep.converged:
                entry["flags"] = barrier_and_minimality(rep, thr, spec, op)
                lvl = boundary_level_bounds(rep, spec)
                entry.update(d_eps=lvl.d, d_lower=lvl.lower, d_upper=lvl.upper)
        except VerificationFailure as exc:
            print(f"verification failure: {exc}", file=sys.stderr)
            entry["error"] = str(exc)
            status = 1
            runs.append(entry)
            continue
        u = rep.solution.values
        w = u - u[-1]
        if cfg.format == "csv":
            io.emit(io.csv_text(["r", "u_eps", "w_eps"], [op.grid.nodes, u, w]), path)
        else:
            entry["profile"] = {"r": op.grid.nodes, "u_eps": u, "w_eps": w}
        runs.append(entry)
    if cfg.format == "json":
        io.emit(io.json_text({"config": cfg.as_dict(), "thresholds": thr.as_dict(),
                              "runs": runs}), cfg.out)
    return status


def cmd_verify(cfg):
    checks = run_suite(cfg)
    summary = summarize(checks)
    if cfg.format == "json":
        io.emit(io.json_text({"config": cfg.as_dict(),
                              "checks": [c.as_dict(cfg.timings) for c in checks],
                              "summary": summary}), cfg.out)
    else:
        lines = ["name,status,measured,tolerance"]
        for c in checks:
            vals = [io.fmt(v) if isinstance(v, (int, float)) and not isinstance(v, bool) else ""
                    for v in (c.measured, c.tolerance)]
            lines.append(",".join([c.name, c.status] + vals))
        io.emit("\n".join(lines) + "\n", cfg.out)
    for c in checks:
        if c.status == "fail":
            print(f"FAIL {c.name}: measured={c.measured!r} tolerance={c.tolerance!r} "
                  f"({c.principle})", file=sys.stderr)
    return 0 if summary["passed"] else 1


def cmd_convergence(cfg):
    """Dyda residuals under M-doubling and the s = 1/2 finiteness study for u(r) = r."""
    order = _order(cfg)
    ke = KernelEvaluator(order)
    ms = [m for m in (cfg.nodes // 4, cfg.nodes // 2, cfg.nodes) if m >= 8]
    res, linear = [], []
    for m in ms:
        grid = build_grid(m, cfg.beta, cfg.dim)
        op = assemble_operator(grid, order)
        res.append(extension_identity_residual(op, ke, dyda_profile(grid, order.s)))
        linear.append(RadialProfile(grid, op.entries @ grid.nodes))
    ratios = [float("nan")] + [a / b for a, b in zip(res, res[1:])]
    orders = [float(np.log2(r)) for r in ratios]
    changes = [float("nan")] + [relative_band_change(a, b) for a, b in zip(linear, linear[1:])]
    if cfg.format == "csv":
        io.emit(io.csv_text(["M", "residual", "ratio", "order", "linear_profile_change"],
                            [ms, res, ratios, orders, changes]), cfg.out)
    else:
        io.emit(io.json_text({"config": cfg.as_dict(), "B": dyda_constant(order),
                              "rows": [{"M": m, "residual": r, "ratio": q, "order": o,
                                        "linear_profile_change": c}
                                       for m, r, q, o, c in zip(ms, res, ratios, orders, changes)]}),
                cfg.out)
    return 0


HANDLERS = {"phi": cmd_phi, "poisson": cmd_poisson, "semilinear": cmd_semilinear,
            "verify": cmd_verify, "convergence": cmd_convergence}


def main(argv=None):
    try:
        cfg = config_from_args(argv)
    except ConfigurationError as exc:
        build_parser().print_usage(sys.stderr)
        print(f"regfrac: error: {exc}", file=sys.stderr)
        return 2
    try:
        return HANDLERS[cfg.command](cfg)
    except (ConfigurationError, DomainError, PreconditionError) as exc:
        print(f"regfrac: error: {exc}", file=sys.stderr)
        return 2
    except VerificationFailure as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 1
    except RegfracError as exc:
        print(f"regfrac: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
