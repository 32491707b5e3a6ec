import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavebreak.profile import (
    RescaledProfile,
    check_profile_bounds,
    eval_profile,
    eval_profile_deriv,
    eval_rescaled,
    eval_rescaled_deriv,
    profile_identities,
)

# real roots of W^3 + W + y = 0, frozen from numpy.roots
FROZEN = [(1.0, -0.6823278038280195), (-2.0, 1.0), (10.0, -2.0), (0.0, 0.0)]

reals = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


@pytest.mark.parametrize("y, W", FROZEN)
def test_frozen_values(y, W):
    assert eval_profile(np.array([y]))[0] == pytest.approx(W, abs=1e-14)


@given(reals)
def test_cubic_residual(y):
    W = eval_profile(np.array([y]))[0]
    assert abs(W**3 + W + y) <= 1e-12 * max(1.0, abs(y))


@given(reals)
def test_odd(y):
    a = eval_profile(np.array([y, -y]))
    assert a[0] == pytest.approx(-a[1], abs=1e-12 * max(1.0, abs(a[0])))


@given(st.floats(min_value=-1e3, max_value=1e3), st.floats(min_value=1e-3, max_value=10))
def test_monotone_decreasing(y, dy):
    a = eval_profile(np.array([y, y + dy]))
    assert a[1] < a[0]


@given(reals)
def test_derivative_identity(y):
    # implicit differentiation of the cubic: W' = -1 / (1 + 3 W^2)
    W = eval_profile(np.array([y]))[0]
    d1 = eval_profile_deriv(np.array([y]), 1)[0]
    assert d1 == pytest.approx(-1.0 / (1 + 3 * W**2), rel=1e-12)


@given(st.floats(min_value=-1e4, max_value=1e4))
def test_steady_equation(y):
    # -W/2 + (3y/2 + W) W' = 0
    W = eval_profile(np.array([y]))[0]
    d1 = eval_profile_deriv(np.array([y]), 1)[0]
    assert abs(-W / 2 + (1.5 * y + W) * d1) <= 1e-12 * max(1.0, abs(y))


def test_taylor_at_origin():
    z = np.array([0.0])
    assert eval_profile_deriv(z, 1)[0] == pytest.approx(-1.0, abs=1e-12)
    assert eval_profile_deriv(z, 3)[0] == pytest.approx(6.0, abs=1e-10)
    assert abs(eval_profile_deriv(z, 2)[0]) < 1e-12


@pytest.mark.parametrize("nu, y, W", [(6.0, 1.0, -0.6823278038280195), (24.0, 1.0, -0.5)])
def test_rescaled_frozen(nu, y, W):
    assert eval_rescaled(np.array([y]), nu)[0] == pytest.approx(W, abs=1e-14)


@given(st.floats(min_value=0.1, max_value=1e3))
def test_rescaled_third_derivative_is_nu(nu):
    z = np.array([0.0])
    assert eval_rescaled_deriv(z, nu, 1)[0] == pytest.approx(-1.0, abs=1e-10)
    assert eval_rescaled_deriv(z, nu, 3)[0] == pytest.approx(nu, rel=1e-9)


def test_rescaled_rejects_nonpositive():
    with pytest.raises(ValueError):
        RescaledProfile(0.0)


def test_identities_and_bounds():
    y = np.concatenate([-np.geomspace(1e6, 1e-6, 5000), np.geomspace(1e-6, 1e6, 5000)])
    ids = profile_identities(y)
    assert ids["cubic_residual"] < 1e-12
    assert ids["ode_residual"] < 1e-10
    rep = check_profile_bounds(y)
    assert rep.passed, [c for c in rep.checks if not c.passed]


@settings(max_examples=50)
@given(st.floats(min_value=100, max_value=1e6))
def test_far_field_window(y):
    # |W'| <y>^(2/3) stays in [1/4, 7/20]
    d1 = abs(eval_profile_deriv(np.array([y]), 1)[0])
    r = d1 * (1 + y * y) ** (1 / 3)
    assert 0.25 <= r <= 0.35
