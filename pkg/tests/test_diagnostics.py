import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavebreak.diagnostics import (
    InsufficientRangeError,
    NoBreakingError,
    VelocityField,
    Verdict,
    amplitude_floor,
    bootstrap_check,
    breaking_time_from_history,
    convergence_check,
    cusp_fit,
    estimate_blowup,
    in_window,
    lifespan_regression,
    profile_distance,
    rate_check,
    sample_y0,
    trace_trajectory,
    transport_residual,
)
from wavebreak.grid import uniform_grid
from wavebreak.initial_data import SeedParams
from wavebreak.renormalization import (
    ModulationRates,
    ModulationRecord,
    extract_modulation,
    log_y_grid,
    renormalize,
    synthetic_frame,
)
from wavebreak.solver import SolverConfig, exact_state, run
from wavebreak.transforms import ModelParams, RiemannState, Topography

P = SeedParams()


# -- cusp ---------------------------------------------------------------------------


@pytest.mark.parametrize("alpha", [0.25, 1 / 3, 0.5, 1.0])
def test_cusp_self_test(alpha):
    x = np.linspace(-1, 1, 20001)
    w = -np.sign(x) * np.abs(x) ** alpha
    fit = cusp_fit(x, w, 0.0, 0.0, 1e-4, 0.5)
    assert fit.exponent == pytest.approx(alpha, abs=1e-3)
    assert fit.ci_low <= fit.exponent <= fit.ci_high


def test_cusp_needs_range():
    x = np.linspace(-1, 1, 2001)
    with pytest.raises(InsufficientRangeError):
        cusp_fit(x, np.abs(x) ** 0.5, 0.0, 0.0, 0.1, 0.5)


# -- convergence --------------------------------------------------------------------


@pytest.mark.parametrize("nu", [6.0, 24.0])
def test_synthetic_frame_distance_is_zero(nu):
    frames = [synthetic_frame(nu, s) for s in np.linspace(4, 6, 9)]
    assert max(profile_distance(f, nu) for f in frames) == 0.0
    rep = convergence_check(frames, nu)
    assert rep.distance.max() == 0.0


@given(st.floats(min_value=1.0, max_value=100.0))
def test_wrong_nu_is_separated(nu):
    f = synthetic_frame(nu, 5.0)
    assert profile_distance(f, 2 * nu) > 0.05


# -- Lagrangian ---------------------------------------------------------------------


def linear_field(rate, s):
    ys = [log_y_grid(1e8, y_min=1e-12) for _ in s]
    return VelocityField(s, ys, [rate * y for y in ys])


@given(st.floats(min_value=-50, max_value=50))
def test_trace_linear_field(y0):
    s = np.linspace(5.0, 7.0, 21)
    path = trace_trajectory(linear_field(1.5, s), y0, P)
    assert not path.truncated
    np.testing.assert_allclose(path.phi, y0 * np.exp(1.5 * (path.s - 5.0)), rtol=1e-6, atol=1e-12)


def test_trace_checks_escape_and_integral():
    s = np.linspace(5.0, 7.0, 21)
    path = trace_trajectory(linear_field(1.5, s), 10.0, P)
    assert path.upper_ok and path.lower_ok and path.integral_ok
    slow = trace_trajectory(linear_field(0.1, s), 10.0, P)
    assert slow.lower_ok is False


def test_trace_z_family_skips_escape_bounds():
    s = np.linspace(5.0, 6.0, 5)
    ys = [np.linspace(-1e6, 1e6, 3) for _ in s]
    f = VelocityField(s, ys, [1.5 * y for y in ys], family="Z")
    path = trace_trajectory(f, 10.0, P)
    assert path.lower_ok is None and path.integral_ok is None


def test_trace_truncates_at_box():
    s = np.linspace(5.0, 7.0, 21)
    ys = [np.linspace(-100, 100, 3) for _ in s]
    path = trace_trajectory(VelocityField(s, ys, [1.5 * y for y in ys]), 50.0, P)
    assert path.truncated and np.abs(path.phi).max() <= 100


def test_sample_y0():
    y0 = sample_y0(P, 1e3)
    assert y0.size == 20 and y0[0] == 0.0
    assert np.abs(y0).max() == pytest.approx(1e3)
    assert np.sum(np.abs(y0) < P.ell) == 3


# -- bootstrap ----------------------------------------------------------------------


def synthetic_pair(s):
    f = synthetic_frame(6.0, s, y_max=0.5 * np.exp(1.5 * s))
    return f, ModulationRecord(-np.exp(-s), 3.0, 0.0, 0.0, s)


def test_profile_passes_bootstrap():
    f, r = synthetic_pair(P.s0 + 1)
    rep = bootstrap_check(f, r, P, ModulationRates(0.0, 3.0, 0.0))
    assert rep.passed, [e for e in rep.entries if not e.passed]


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=0.2, max_value=5.0), st.floats(min_value=1.0, max_value=3.0))
def test_relax_is_monotone(relax, factor):
    f, r = synthetic_pair(P.s0 + 1)
    q = ModulationRates(0.0, 3.0, 0.0)
    a = bootstrap_check(f, r, P, q, relax=relax)
    b = bootstrap_check(f, r, P, q, relax=relax * factor)
    for ea, eb in zip(a.entries, b.entries):
        if not ea.skipped:
            assert eb.worst_lhs - eb.bound <= ea.worst_lhs - ea.bound + 1e-12
    assert not a.passed or b.passed


# -- blowup estimate and rate --------------------------------------------------------


@pytest.fixture(scope="module")
def odd_run():
    # w0 = 1 - sin x, z = -3: w-speed -sin x vanishes at x = 0, so x* = 0 and T* = 1
    g = uniform_grid(2048, 2 * np.pi)
    st_ = RiemannState(g, 1.0 - np.sin(g.x), np.full(g.n, -3.0))
    traj = run(st_, Topography(), ModelParams(), SolverConfig())
    recs = [extract_modulation(s) for s in traj.snapshots]
    return g, traj, recs


def test_odd_seed_blowup_location(odd_run):
    g, _, recs = odd_run
    est = estimate_blowup(recs)
    assert abs(est.x) <= g.dx
    assert est.T == pytest.approx(1.0, abs=1e-3)


def test_odd_seed_rate_product(odd_run):
    _, traj, recs = odd_run
    rep = rate_check(traj, estimate_blowup(recs).T, recs)
    assert rep.product.size >= 5
    assert np.all(np.abs(rep.product - 1) < 0.01)


def test_window_excludes_unresolved():
    assert in_window(ModulationRecord(0.0, 3.0, 1.0, 0.0, 0.0, dy_local=1e-3))
    assert not in_window(ModulationRecord(0.0, 3.0, 1.0, 0.0, 0.0, dy_local=0.1))


def test_blowup_needs_history():
    recs = [ModulationRecord(0.1 * k, 3.0, 1.0, 0.0, 0.0, dy_local=1e-3) for k in range(3)]
    with pytest.raises(InsufficientRangeError):
        estimate_blowup(recs)


# -- lifespan -----------------------------------------------------------------------


@given(st.floats(min_value=0.5, max_value=5.0), st.floats(min_value=-1.5, max_value=-0.5))
def test_lifespan_regression_recovers_power(c, p):
    amps = [0.02, 0.04, 0.08, 0.16, 0.32]
    fit = lifespan_regression([(a, 0.0, c * a**p) for a in amps], min_decades=1.2)
    assert fit.slope == pytest.approx(p, abs=1e-9)


def test_lifespan_regression_span_guard():
    pts = [(a, 0.0, 1 / a) for a in (0.02, 0.04, 0.08, 0.16, 0.32)]
    with pytest.raises(InsufficientRangeError):
        lifespan_regression(pts, min_decades=1.5)
    with pytest.raises(InsufficientRangeError):
        lifespan_regression(pts[:4], min_decades=0.5)


@given(st.floats(min_value=1.0, max_value=100.0))
def test_breaking_time_linear_history(T):
    t = np.linspace(0, 0.99 * T, 200)
    assert breaking_time_from_history(t, -1 / (T - t)) == pytest.approx(T, rel=1e-9)


def test_breaking_time_respects_floor():
    t = np.linspace(0, 0.999, 400)
    slope = -1 / (1 - t)
    # a distorted tail below the floor must not move the estimate
    slope[t > 0.99] *= 3
    assert breaking_time_from_history(t, slope, m_floor=0.011) == pytest.approx(1.0, rel=1e-6)


def test_no_breaking():
    with pytest.raises((NoBreakingError, InsufficientRangeError)):
        breaking_time_from_history(np.linspace(0, 1, 50), np.full(50, 0.5))


def test_amplitude_floor():
    assert amplitude_floor(0.01, 0.5) == pytest.approx(0.4)


# -- transport residual and verdict --------------------------------------------------


def test_transport_residual_exact_burgers():
    # exact solution: the residual is the O(h^2) error of differencing in s
    g = uniform_grid(8192, 2 * np.pi)
    res = []
    for h in (0.01, 0.005, 0.0025):
        states = [exact_state(lambda x: 3.0 - np.sin(x), 0.0, g, t, t_star=1.0) for t in 0.6 + h * np.arange(3)]
        recs, frames = renormalize(states)
        res.append(transport_residual(frames, recs, y_max=5)[0])
    orders = np.log2(np.array(res[:-1]) / np.array(res[1:]))
    assert np.all(orders > 1.9), orders
    assert res[-1] < 1e-4


def test_verdict_json_roundtrip():
    v = Verdict({"I": {"passed": True, "T": float("inf")}, "II": {"passed": False}})
    assert not v.passed
    d = json.loads(v.to_json())
    assert d["items"]["I"]["passed"] is True
