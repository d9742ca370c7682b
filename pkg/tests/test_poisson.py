import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regfrac.assembly import RadialProfile, assemble_operator, build_grid
from regfrac.errors import ConfigurationError, PreconditionError
from regfrac.kernel import FracOrder, KernelEvaluator
from regfrac.poisson import (PoissonSpec, energy_functional, exhaustion_study, shift_and_mass,
                             solve_full, solve_truncated)

ORDER = FracOrder(0.25, 2)


def spec(source, m=64, r0=1.0, order=ORDER):
    return PoissonSpec(order, m, 2.0, source, r0=r0)


@pytest.mark.parametrize("c", [0.5, 3.0, 120.0])
def test_constant_source_reproduced(c):
    rep = solve_full(spec(f"constant:{c}"))
    assert np.abs(rep.solution.values - c).max() <= 1e-10 * c
    assert rep.boundary_level == pytest.approx(c, rel=1e-12)
    assert rep.linear_residual <= 1e-12


def test_zero_source_truncated():
    rep = solve_truncated(spec("constant:0", r0=0.5))
    assert np.all(rep.solution.values == 0.0)


def test_unit_source_truncated_is_between_zero_and_one():
    rep = solve_truncated(spec("constant:1", m=128, r0=0.5))
    r = rep.solution.grid.nodes
    inside = rep.solution.values[r < 0.5]
    assert np.all(inside > 0) and np.all(inside < 1)
    assert np.all(rep.solution.values[r >= 0.5] == 0.0)


def test_truncated_solution_grows_with_radius():
    a = solve_truncated(spec("two-minus-r-squared", r0=0.5))
    b = solve_truncated(spec("two-minus-r-squared", r0=0.75))
    assert np.all(a.solution.values <= b.solution.values + 1e-8)


def test_negative_source_rejected():
    with pytest.raises(PreconditionError):
        solve_full(spec("gaussian:-1,1"))


def test_radius_routing():
    with pytest.raises(ConfigurationError):
        solve_truncated(spec("constant:1"))
    with pytest.raises(ConfigurationError):
        solve_full(spec("constant:1", r0=0.5))
    with pytest.raises(ConfigurationError):
        PoissonSpec(ORDER, r0=0.0)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(0.0, 5.0), min_size=33, max_size=33),
       st.lists(st.floats(0.0, 5.0), min_size=33, max_size=33))
def test_solution_map_is_increasing(f1, f2):
    g = build_grid(32, 2.0, 2)
    lo = np.minimum(f1, f2)
    hi = np.maximum(f1, f2)
    u1 = solve_full(PoissonSpec(ORDER, source=RadialProfile(g, lo))).solution.values
    u2 = solve_full(PoissonSpec(ORDER, source=RadialProfile(g, hi))).solution.values
    assert np.all(u1 <= u2 + 1e-10)


def test_positive_source_gives_positive_solution():
    g = build_grid(32, 2.0, 2)
    f = np.zeros(33)
    f[5] = 1.0
    u = solve_full(PoissonSpec(ORDER, source=RadialProfile(g, f))).solution.values
    assert u.min() > 0


def test_shift_of_constant_source():
    rep = shift_and_mass(solve_full(spec("constant:2")))
    assert rep.boundary_level == pytest.approx(2.0, rel=1e-12)
    assert np.abs(rep.shifted_solution.values).max() <= 1e-12
    assert rep.mass_residual <= 1e-12


def test_shift_mass_identity_and_level():
    rep = shift_and_mass(solve_full(spec("two-minus-r-squared", m=128)))
    assert rep.mass_residual <= 1e-6 * rep.mass_scale
    assert 1.0 - 1e-8 <= rep.boundary_level < 1.5
    assert rep.shifted_solution.values[-1] == 0.0
    assert rep.monotonicity_flags["level_upper"] == "pass"


def test_exhaustion_study():
    study = exhaustion_study(spec("two-minus-r-squared"), [0.5, 0.75, 0.9, 0.99])
    assert study.all_monotone
    assert study.distances_decreasing


def test_exhaustion_single_radius_matches_truncated():
    s = spec("two-minus-r-squared")
    study = exhaustion_study(s, [0.6])
    direct = solve_truncated(replace(s, r0=0.6))
    np.testing.assert_array_equal(study.reports[0].solution.values, direct.solution.values)


@pytest.mark.parametrize("radii", [[0.5, 0.5], [0.7, 0.6], [0.5, 1.0], []])
def test_exhaustion_rejects_bad_radii(radii):
    with pytest.raises(ConfigurationError):
        exhaustion_study(spec("constant:1"), radii)


def test_energy_of_zero_and_constants():
    g = build_grid(32, 2.0, 2)
    op = assemble_operator(g, ORDER)
    zero = RadialProfile(g, np.zeros(33))
    assert energy_functional(zero, zero, op) == 0.0
    c = 1.7
    const = RadialProfile(g, np.full(33, c))
    assert energy_functional(const, const, op) == pytest.approx(-0.5 * c * c * math.pi, rel=1e-13)


def test_energy_accepts_kernel_evaluator():
    g = build_grid(32, 2.0, 2)
    u = RadialProfile(g, 1 - g.nodes ** 2)
    a = energy_functional(u, u, KernelEvaluator(ORDER))
    b = energy_functional(u, u, assemble_operator(g, ORDER))
    assert a == b


def test_solution_minimizes_energy():
    rep = solve_full(spec("two-minus-r-squared"))
    op = assemble_operator(rep.solution.grid, ORDER)
    rng = np.random.default_rng(11)
    for _ in range(10):
        k = rng.integers(0, 65)
        v = rep.solution.values.copy()
        v[k] += rng.choice([-1e-3, 1e-3])
        e = energy_functional(RadialProfile(op.grid, v), rep.source, op)
        assert e >= rep.energy


def test_energy_rejects_grid_mismatch():
    a = RadialProfile(build_grid(16, 2.0, 2), np.zeros(17))
    b = RadialProfile(build_grid(32, 2.0, 2), np.zeros(33))
    with pytest.raises(ConfigurationError):
        energy_functional(a, b, KernelEvaluator(ORDER))
