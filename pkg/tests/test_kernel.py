import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regfrac.errors import DomainError, SingularityError
from regfrac.kernel import (FracOrder, KernelEvaluator, dyda_constant, normalization_constant,
                            phi_boundary_constant)
from regfrac.special import sphere_area

# Reference values below were computed once with mpmath at 30 digits.
C_NS = {
    (2, 0.25): 0.083241983875425065489,
    (2, 0.5): 0.15915494309189533577,
    (3, 0.5): 0.10132118364233777144,
    (3, 0.25): 0.047620226950680727339,
    (4, 0.3): 0.041410448148230242555,
}
DYDA = {
    (2, 0.25): 1.1618690023502417307,
    (2, 0.5): 1.5707963267948966192,
    (3, 0.5): 2.0,
    (3, 0.25): 1.3293403881791370205,
    (4, 0.3): 1.5870912745550564487,
}
C1 = {
    (2, 0.25): 4.7925609389423688298,
    (2, 0.5): 2.0,
    (3, 0.25): 8.3775804095727819692,
    (4, 0.3): 9.2608022037495436939,
}
# J(r, ρ) by adaptive quadrature of the θ-integral
J_REF = [
    (2, 0.25, 0.3, 0.7, 21.024808225170114613),
    (2, 0.5, 0.5, 0.55, 1530.6056230615100991),
    (3, 0.5, 0.2, 0.9, 21.194755632246874337),
    (3, 0.25, 0.6, 0.61, 11436.183346195787114),
    (4, 0.3, 0.1, 0.4, 1471.6476689310828026),
    (2, 0.25, 0.9, 1.5, 4.5593247643394993946),
]
# φ(r) = ∫_{|y|>1}|x-y|^{-N-2s}dy by nested mpmath quadrature
PHI_REF = [
    (2, 0.25, 0.5, 13.765499120048633406),
    (3, 0.25, 0.5, 27.361063043453100527),
    (3, 0.5, 0.9, 43.347427315679792725),
]


@pytest.mark.parametrize("s,dim", [(0.0, 2), (1.0, 2), (-0.1, 3), (0.3, 1), (0.3, 2.5)])
def test_frac_order_rejects_bad_input(s, dim):
    with pytest.raises(DomainError):
        FracOrder(s, dim)


def test_large_s_needs_override():
    order = FracOrder(0.7, 2)
    with pytest.raises(DomainError):
        order.require_low_order()
    order.require_low_order(allow_large_s=True)


@pytest.mark.parametrize("key", sorted(C_NS))
def test_normalization_constant(key):
    dim, s = key
    assert normalization_constant(FracOrder(s, dim)) == pytest.approx(C_NS[key], rel=1e-13)


@pytest.mark.parametrize("key", sorted(DYDA))
def test_dyda_constant(key):
    dim, s = key
    assert dyda_constant(FracOrder(s, dim)) == pytest.approx(DYDA[key], rel=1e-13)


@pytest.mark.parametrize("key", sorted(C1))
def test_boundary_constant(key):
    dim, s = key
    order = FracOrder(s, dim)
    assert phi_boundary_constant(order) == pytest.approx(C1[key], rel=1e-12)
    assert KernelEvaluator(order).boundary_constant() == phi_boundary_constant(order)


@pytest.mark.parametrize("dim,s,r,rho,ref", J_REF)
def test_angular_kernel_against_quadrature(dim, s, r, rho, ref):
    ke = KernelEvaluator(FracOrder(s, dim))
    assert ke.angular_kernel(r, rho) == pytest.approx(ref, rel=1e-10)


def test_angular_kernel_symmetry_random_pairs():
    rng = np.random.default_rng(7)
    for dim, s in [(2, 0.25), (2, 0.5), (3, 0.4)]:
        ke = KernelEvaluator(FracOrder(s, dim))
        r, rho = rng.uniform(0.0, 1.0, (2, 200))
        a = ke.angular_kernel(r, rho)
        b = ke.angular_kernel(rho, r)
        assert np.all(a > 0)
        np.testing.assert_allclose(a, b, rtol=1e-12)


@pytest.mark.parametrize("dim,s,rtol", [(2, 0.25, 1e-12), (3, 0.5, 1e-12), (5, 0.1, 1e-9)])
def test_angular_kernel_at_origin_is_closed_form(dim, s, rtol):
    # higher powers of sin ψ cos ψ are resolved less sharply by 8 nodes per panel
    ke = KernelEvaluator(FracOrder(s, dim))
    rho = np.array([0.1, 0.5, 0.9])
    expect = sphere_area(dim - 1) * rho ** (-dim - 2 * s)
    np.testing.assert_allclose(ke.angular_kernel(0.0, rho), expect, rtol=rtol)


def test_angular_kernel_near_diagonal_asymptote():
    ke = KernelEvaluator(FracOrder(0.3, 2))
    r = 0.6
    for delta in (1e-4, 1e-5):
        rho = r + delta
        approx = ke.near_diag_coefficient * (r * rho) ** -0.5 * delta ** (-1 - 0.6)
        assert ke.angular_kernel(r, rho) == pytest.approx(approx, rel=20 * delta)


def test_angular_kernel_continuous_across_asymptote_switch():
    ke = KernelEvaluator(FracOrder(0.25, 3))
    r = 0.4
    below = ke.angular_kernel(r, r + 0.999e-6) * (0.999e-6) ** 1.5
    above = ke.angular_kernel(r, r + 1.001e-6) * (1.001e-6) ** 1.5
    assert below == pytest.approx(above, rel=1e-5)


def test_angular_kernel_domain_errors():
    ke = KernelEvaluator(FracOrder(0.25, 2))
    with pytest.raises(SingularityError):
        ke.angular_kernel(0.5, 0.5)
    with pytest.raises(DomainError):
        ke.angular_kernel(-0.1, 0.5)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 0.5), st.floats(0.0, 0.95), st.floats(0.0, 0.95))
def test_radial_kernel_is_positive_and_weighted(s, r, rho):
    if abs(r - rho) < 1e-9:
        return
    ke = KernelEvaluator(FracOrder(s, 2))
    k = ke.radial_kernel(r, rho)
    assert k >= 0
    assert k == pytest.approx(rho * ke.angular_kernel(r, rho), rel=1e-14)


@pytest.mark.parametrize("dim,s", [(2, 0.25), (2, 0.5), (3, 0.5), (4, 0.3)])
def test_phi_at_origin(dim, s):
    ke = KernelEvaluator(FracOrder(s, dim))
    exact = sphere_area(dim - 1) / (2 * s)
    assert ke.phi_raw(0.0) == pytest.approx(exact, rel=1e-10)


@pytest.mark.parametrize("dim,s,r,ref", PHI_REF)
def test_phi_against_nested_quadrature(dim, s, r, ref):
    ke = KernelEvaluator(FracOrder(s, dim))
    assert ke.phi_raw(r) == pytest.approx(ref, rel=1e-8)


def test_phi_increases_toward_boundary():
    ke = KernelEvaluator(FracOrder(0.25, 2))
    vals = ke.phi_raw(np.linspace(0.0, 0.999, 25))
    assert np.all(np.diff(vals) > 0)


@pytest.mark.parametrize("s", [0.25, 0.5])
def test_phi_boundary_rate(s):
    ke = KernelEvaluator(FracOrder(s, 2))
    c1 = ke.boundary_constant()
    devs = [abs(ke.phi_raw(1 - g) * g ** (2 * s) / c1 - 1) for g in (1e-2, 1e-3, 1e-4, 1e-5)]
    assert all(b < a for a, b in zip(devs, devs[1:]))
    assert devs[2] < 0.02


def test_killing_potential_scales_phi():
    ke = KernelEvaluator(FracOrder(0.5, 2))
    assert ke.killing_potential(0.3) == pytest.approx(ke.c_ns * ke.phi_raw(0.3), rel=1e-15)


@pytest.mark.parametrize("r", [1.0, 1.2, -0.01])
def test_phi_domain(r):
    with pytest.raises(DomainError):
        KernelEvaluator(FracOrder(0.25, 2)).phi_raw(r)


def test_c1_for_s_half_in_plane():
    # ∫_0^∞ (1+τ²)^{-3/2} dτ = 1, so c1 = |S^0| / 1 = 2
    assert phi_boundary_constant(FracOrder(0.5, 2)) == pytest.approx(2.0, rel=1e-14)
    assert math.isclose(phi_boundary_constant(FracOrder(0.5, 3)), math.pi, rel_tol=1e-13)
