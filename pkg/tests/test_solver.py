import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavebreak.grid import uniform_grid
from wavebreak.solver import (
    SolverConfig,
    ValidityError,
    burgers_breaking_time,
    burgers_exact,
    exact_state,
    mass,
    min_slope,
    run,
    run_to,
    stable_dt,
)
from wavebreak.transforms import ModelParams, RiemannState, Topography, to_riemann

FLAT = Topography()
P = ModelParams()


def sine_state(n, k0=3.0, a=0.1, z=0.0):
    g = uniform_grid(n, 2 * np.pi)
    return RiemannState(g, k0 - a * np.sin(g.x), np.full(n, z))


def oracle_error(n, t, frame_speed=0.0, a=0.1, z=0.0):
    w0 = lambda x: 3.0 - a * np.sin(x)
    st_ = sine_state(n, a=a, z=z)
    out = run_to(st_, FLAT, P, SolverConfig(frame_speed=frame_speed), t)
    ex = burgers_exact(w0, z, st_.grid.wrap(out.x_phys), t, dw0=lambda x: -a * np.cos(x), t_star=1 / a)
    return np.abs(out.w - ex).max()


def test_oracle_order():
    # a = 0.5 keeps the error above roundoff on coarse grids
    e = [oracle_error(n, 1.0, a=0.5) for n in (128, 256, 512)]
    orders = np.log2(np.array(e[:-1]) / np.array(e[1:]))
    assert orders.min() > 4.0, orders


def test_oracle_with_constant_z():
    # z = const shifts the w speed by z/3
    assert oracle_error(256, 1.0, a=0.5, z=-1.2) < 1e-5


@given(st.floats(min_value=0.05, max_value=2.0), st.floats(min_value=0.0, max_value=0.95))
def test_exact_solution_is_constant_on_characteristics(a, frac):
    T = 1 / a
    t = frac * T
    x0 = np.linspace(-np.pi, np.pi, 7)
    w0 = lambda x: 3.0 - a * np.sin(x)
    xt = x0 + t * w0(x0)
    np.testing.assert_allclose(burgers_exact(w0, 0.0, xt, t, t_star=T), w0(x0), atol=1e-11)


def test_exact_refuses_past_breaking():
    with pytest.raises(ValidityError):
        burgers_exact(lambda x: -np.sin(x), 0.0, np.zeros(3), 1.5, t_star=1.0)


@given(st.floats(min_value=0.05, max_value=5.0))
def test_breaking_time_formula(a):
    xs = np.linspace(-np.pi, np.pi, 10001)
    assert burgers_breaking_time(lambda x: 1 - a * np.sin(x), xs, lambda x: -a * np.cos(x)) == pytest.approx(1 / a)


def test_lake_at_rest():
    g = uniform_grid(256, 8 * np.pi)
    topo, p = Topography("sine", 1.0, 4.0), ModelParams(1.0, 0.0, 0.1, 0.1)
    w, z = to_riemann(1 - 0.1 * topo(g.x), np.zeros(g.n))
    out = run_to(RiemannState(g, w, z), topo, p, SolverConfig(), 5.0)
    assert np.abs(out.w - w).max() < 1e-9
    assert np.abs(out.z - z).max() < 1e-9


def test_mass_conserved_flat_bottom():
    g = uniform_grid(256, 2 * np.pi)
    s = RiemannState(g, 1.5 + 0.1 * np.sin(g.x), -1.5 + 0.05 * np.cos(g.x))
    out = run_to(s, FLAT, P, SolverConfig(), 2.0)
    assert mass(out) == pytest.approx(mass(s), abs=1e-9)


def test_rerun_bit_identical():
    s = sine_state(256, a=0.5)
    a = run_to(s, FLAT, P, SolverConfig(frame_speed=3.0), 1.0)
    b = run_to(s, FLAT, P, SolverConfig(frame_speed=3.0), 1.0)
    assert np.array_equal(a.w, b.w) and a.offset == b.offset


@settings(max_examples=10, deadline=None)
@given(st.floats(min_value=-5, max_value=5))
def test_frame_speed_invariance(c):
    # the moving frame changes only the discretization, not the solution
    e = oracle_error(512, 1.0, frame_speed=c, a=0.5)
    assert e < 1e-6


def test_cfl_bound():
    s = sine_state(128, a=0.5)
    cfg = SolverConfig(cfl=0.4)
    dt = stable_dt(s, cfg)
    speed = max(np.abs(s.w + s.z / 3).max(), np.abs(s.w / 3 + s.z).max())
    assert 0 < dt * speed <= 0.4 * s.grid.dx * (1 + 1e-12)


def test_run_stops_on_slope():
    s = sine_state(1024, a=1.0)
    traj = run(s, FLAT, P, SolverConfig(frame_speed=3.0))
    assert traj.stop_reason == "slope"
    assert traj.t[-1] < 1.0
    assert traj.min_slope[-1] <= -1.0 / (1.0 - traj.t[-1]) * 0.9


def test_run_respects_t_max():
    s = sine_state(128, a=0.01)
    traj = run(s, FLAT, P, SolverConfig(t_max=0.5))
    assert traj.stop_reason == "t_max" and traj.t[-1] == pytest.approx(0.5)


def test_exact_state_slope_grows_like_inverse_time():
    g = uniform_grid(4096, 2 * np.pi)
    for t in (0.5, 0.9):
        s = exact_state(lambda x: 3.0 - np.sin(x), 0.0, g, t, t_star=1.0)
        slope, _, _ = min_slope(g, s.w)
        assert slope * (1 - t) == pytest.approx(-1.0, rel=1e-3)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(cfl=0.9)
