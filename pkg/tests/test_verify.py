import numpy as np
import pytest

from regfrac.assembly import RadialProfile, assemble_operator, build_grid
from regfrac.config import RunConfig
from regfrac.kernel import FracOrder
from regfrac.verify import (abp_scaling_check, central_disk_sets, comparison_check,
                            dyda_oracle_check, radial_monotonicity_check, run_suite,
                            scalar_fixed_point, summarize)


@pytest.fixture(scope="module")
def op():
    return assemble_operator(build_grid(64, 2.0, 2), FracOrder(0.25, 2))


def test_comparison_zero_source(op):
    res = comparison_check(op, 0.8, sources=[np.zeros(op.grid.node_count)])
    assert res.status == "pass" and res.measured == 0.0


def test_comparison_spike(op):
    g = np.zeros(op.grid.node_count)
    g[10] = 1.0
    res = comparison_check(op, 0.8, sources=[g])
    assert res.status == "pass" and res.measured >= 0.0


def test_comparison_random(op):
    res = comparison_check(op, 0.8, trials=5, seed=1)
    assert res.status == "pass"
    assert res.detail["trials"] == 5


def test_disk_sets_shrink(op):
    sets = central_disk_sets(op.grid)
    cells = op.grid.dual_cell_measures()
    meas = [cells[s].sum() for s in sets]
    assert meas[0] > meas[1] > meas[2] > 0


def test_abp_bounded(op):
    res = abp_scaling_check(op, seed=42)
    assert res.status == "pass"
    assert res.measured <= 10


def test_abp_skips_degenerate(op):
    res = abp_scaling_check(op, sets=[np.arange(0), np.arange(5)])
    assert res.status == "skipped"
    assert "measure 0" in res.detail["skipped"][0]


def test_abp_denominator_scaling():
    # halving |O| scales |O|^{2s/N} by 2^{-2s/N}
    s, n = 0.25, 2
    assert (0.5 ** (2 * s / n)) == pytest.approx(2 ** (-0.25))


def test_monotonicity_constant_profile(op):
    u = RadialProfile(op.grid, np.ones(op.grid.node_count))
    assert radial_monotonicity_check(u).status == "pass"
    strict = radial_monotonicity_check(u, strict_interior=True)
    assert strict.status == "fail" and strict.detail["reason"] == "constant source"


def test_monotonicity_detects_increase(op):
    u = RadialProfile(op.grid, op.grid.nodes)
    assert radial_monotonicity_check(u).status == "fail"


def test_monotonicity_strict_decrease(op):
    u = RadialProfile(op.grid, 2 - op.grid.nodes ** 2)
    assert radial_monotonicity_check(u, strict_interior=True).status == "pass"


def test_dyda_check_reports_orders():
    res = dyda_oracle_check(FracOrder(0.25, 2), [32, 64])
    assert len(res.detail["empirical_orders"]) == 1
    assert res.detail["residuals"][1] < res.detail["residuals"][0]
    with pytest.raises(ValueError):
        dyda_oracle_check(FracOrder(0.25, 2), [64, 32])


def test_scalar_fixed_point():
    assert scalar_fixed_point(1, 1, 2, 0.1) == pytest.approx((1 - 0.6 ** 0.5) / 2, abs=1e-14)
    assert np.isnan(scalar_fixed_point(1, 1, 2, 1.0))


def test_suite_small_grid_lists_every_check():
    checks = run_suite(RunConfig("verify", nodes=32, eps=[0.1, 0.3]))
    names = [c.name for c in checks]
    assert len(names) == len(set(names))
    assert "semilinear_barrier[eps=0.3]" in names
    barrier = next(c for c in checks if c.name == "semilinear_barrier[eps=0.3]")
    assert barrier.status == "skipped" and barrier.detail["reason"]
    summary = summarize(checks)
    assert summary["total"] == len(checks)
