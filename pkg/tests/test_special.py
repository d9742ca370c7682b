import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regfrac.special import ball_volume, beta, gamma, sphere_area


@pytest.mark.parametrize("x", [0.5, 1.0, 1.25, 2.5, 3.0, 7.75, 20.0, 0.01])
def test_gamma_matches_stdlib(x):
    assert gamma(x) == pytest.approx(math.gamma(x), rel=1e-13)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=-9.9, max_value=60.0).filter(lambda x: abs(x - round(x)) > 1e-3 or x > 0.5))
def test_gamma_against_mpmath(x):
    assert gamma(x) == pytest.approx(float(mpmath.gamma(x)), rel=1e-12)


@pytest.mark.parametrize("x", [0.0, -1.0, -4.0])
def test_gamma_poles(x):
    with pytest.raises(ValueError):
        gamma(x)


def test_beta_symmetric_and_exact():
    assert beta(0.5, 0.5) == pytest.approx(math.pi, rel=1e-14)
    assert beta(2.0, 3.0) == pytest.approx(1.0 / 12.0, rel=1e-14)
    assert beta(0.3, 1.7) == pytest.approx(beta(1.7, 0.3), rel=1e-15)


def test_sphere_areas():
    assert sphere_area(0) == 2.0
    assert sphere_area(1) == pytest.approx(2 * math.pi, rel=1e-15)
    assert sphere_area(2) == pytest.approx(4 * math.pi, rel=1e-15)
    assert sphere_area(3) == pytest.approx(2 * math.pi ** 2, rel=1e-14)


def test_ball_volume_is_area_over_dim():
    for n in range(2, 7):
        assert ball_volume(n) == pytest.approx(sphere_area(n - 1) / n, rel=1e-14)
    assert ball_volume(2) == pytest.approx(math.pi, rel=1e-15)
