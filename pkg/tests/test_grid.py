import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wavebreak.grid import sinh_grid, uniform_grid


def _order(errs, ns):
    return np.log(errs[0] / errs[-1]) / np.log(ns[-1] / ns[0])


def test_central_derivative_order():
    ns = [64, 128]
    errs = []
    for n in ns:
        g = uniform_grid(n, 2 * np.pi)
        errs.append(np.abs(g.ddx(np.sin(g.x)) - np.cos(g.x)).max())
    assert _order(errs, ns) > 7.5


@pytest.mark.parametrize("sign", [1.0, -1.0])
def test_upwind_derivative_order(sign):
    ns = [64, 128]
    errs = []
    for n in ns:
        g = uniform_grid(n, 2 * np.pi)
        d = g.ddx_upwind(np.sin(g.x), np.full(n, sign))
        errs.append(np.abs(d - np.cos(g.x)).max())
    assert _order(errs, ns) > 4.5


def test_sinh_grid_clusters_at_origin():
    g = sinh_grid(1024, 16.0, 1e-3)
    dx = g.dx_local
    assert dx[np.argmin(np.abs(g.x))] < 1e-2 * dx.max()
    assert g.x.min() >= -8.0 and g.x.max() < 8.0


def test_sinh_derivative_accuracy():
    g = sinh_grid(2048, 16.0, 0.05)
    f = np.exp(-g.x**2)
    err = np.abs(g.ddx(f) + 2 * g.x * f).max()
    assert err < 1e-6


@given(st.floats(min_value=-50, max_value=50))
def test_wrap_lands_in_box(x):
    g = uniform_grid(32, 4.0)
    w = g.wrap(x)
    assert -2.0 <= w < 2.0
    assert (x - w) / 4.0 == pytest.approx(round((x - w) / 4.0), abs=1e-9)


@given(st.floats(min_value=-3.0, max_value=3.0))
def test_mapping_roundtrip(x):
    g = sinh_grid(256, 2 * np.pi, 0.01)
    assert g.x_of_q(g.q_of_x(x)) == pytest.approx(x, abs=1e-12)


@given(st.floats(min_value=-np.pi, max_value=np.pi))
def test_interp_smooth(x):
    g = uniform_grid(256, 2 * np.pi)
    assert g.interp(np.sin(g.x), np.array([x]))[0] == pytest.approx(np.sin(x), abs=1e-9)


def test_integrate_localized():
    g = sinh_grid(512, 16.0, 0.1)
    assert g.integrate(np.exp(-g.x**2)) == pytest.approx(np.sqrt(np.pi), rel=1e-10)


@given(st.floats(min_value=-2.5, max_value=2.5))
def test_argmin_subgrid(x0):
    g = uniform_grid(512, 2 * np.pi)
    _, xm = g.argmin_subgrid((g.x - x0) ** 2)
    assert xm == pytest.approx(x0, abs=1e-9)
