"""End-to-end acceptance checks, one group per criterion.

Long runs are shared through module-scoped fixtures; the full file takes
roughly ten minutes on one core.
"""

import json
import shutil
import time
from pathlib import Path

import numpy as np
import pytest

from wavebreak import config, harness, profile
from wavebreak.diagnostics import convergence_check, cusp_fit, profile_distance
from wavebreak.grid import uniform_grid
from wavebreak.initial_data import SeedParams
from wavebreak.renormalization import estimate_nu, synthetic_frame
from wavebreak.solver import SolverConfig, burgers_exact, run_to
from wavebreak.transforms import ModelParams, RiemannState, Topography

pytestmark = pytest.mark.slow


def criterion(n, title):
    return pytest.mark.criterion(n, title)


def load(run_dir: Path, name: str) -> dict:
    return json.loads((run_dir / name).read_text())


class Run:
    def __init__(self, out: Path, seconds: float, manifest):
        self.out = out
        self.seconds = seconds
        self.manifest = manifest
        self.diag = load(out, "diagnostics.json")
        self.verdict = load(out, "verdict.json")


def simulate(preset: str, out: Path) -> Run:
    cfg = config.resolve(preset, overrides={"run.output": str(out)})
    t0 = time.perf_counter()
    man = harness.run_single(cfg)
    return Run(out, time.perf_counter() - t0, man)


def sweep(preset: str, out: Path, workers: int) -> tuple[dict, float]:
    cfg = config.resolve(preset, overrides={"run.output": str(out), "sweep.workers": workers})
    t0 = time.perf_counter()
    res = harness.run_sweep(cfg)
    return res, time.perf_counter() - t0


@pytest.fixture(scope="module")
def root(tmp_path_factory):
    return tmp_path_factory.mktemp("acceptance")


@pytest.fixture(scope="module")
def oracle(root):
    return simulate("burgers-oracle", root / "burgers-oracle")


@pytest.fixture(scope="module")
def seeded(root):
    return simulate("paper-seed", root / "paper-seed")


@pytest.fixture(scope="module")
def sweeps(root):
    out = {}
    for preset in ("eps-sweep", "topo-sine"):
        out[preset] = sweep(preset, root / preset, workers=8)
    return out


# -- 1 -------------------------------------------------------------------------------------------


@criterion(1, "profile identities and decay bounds")
def test_profile_identities():
    y = np.concatenate([-np.geomspace(1e6, 1e-6, 5000), np.geomspace(1e-6, 1e6, 5000)])
    t0 = time.perf_counter()
    ids = profile.profile_identities(y)
    rep = profile.check_profile_bounds(y)
    elapsed = time.perf_counter() - t0
    tay = ids["taylor"]
    assert ids["cubic_residual"] < 1e-12
    assert ids["ode_residual"] < 1e-10
    assert abs(tay["d1"] + 1) <= 1e-8
    assert abs(tay["d3"] - 6) <= 1e-8
    assert max(abs(tay["d2"]), abs(tay["d4"])) <= 1e-8
    assert all(c.n_fail == 0 for c in rep.checks), [c for c in rep.checks if c.n_fail]
    assert any("sharp" in c.name for c in rep.checks)
    assert elapsed < 1.0


# -- 2 -------------------------------------------------------------------------------------------


@criterion(2, "solver matches exact Burgers characteristics")
def test_oracle_equivalence():
    k0, a = 3.0, 0.1
    w0 = lambda x: k0 - a * np.sin(x)  # noqa: E731
    T = 1 / a
    t0 = time.perf_counter()
    errs = []
    for n in (1024, 2048, 4096):
        g = uniform_grid(n, 2 * np.pi)
        st = RiemannState(g, w0(g.x), np.zeros(n))
        out = run_to(st, Topography(), ModelParams(), SolverConfig(), 0.5 * T)
        ex = burgers_exact(w0, 0.0, g.wrap(out.x_phys), 0.5 * T, dw0=lambda x: -a * np.cos(x), t_star=T)
        errs.append(float(np.abs(out.w - ex).max()))
    elapsed = time.perf_counter() - t0
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert errs[-1] <= 1e-6
    assert orders.min() >= 4.0, orders
    assert elapsed < 60.0


# -- 3 -------------------------------------------------------------------------------------------


@criterion(3, "rate product (T* - t) max|w_x| stays in band")
def test_rate_oracle(oracle):
    rate = oracle.diag["rate"]
    assert rate["n"] == oracle.diag["window"]["n_in_window"] >= 5
    assert 0.5 <= rate["min"] and rate["max"] <= 2.0
    assert 0.99 <= rate["min"] and rate["max"] <= 1.01
    assert rate["continuous"]


@criterion(3, "rate product (T* - t) max|w_x| stays in band")
def test_rate_seeded(seeded, oracle):
    rate = seeded.diag["rate"]
    assert rate["n"] == seeded.diag["window"]["n_in_window"] >= 5
    assert 0.5 <= rate["min"] and rate["max"] <= 2.0
    assert rate["continuous"]
    assert seeded.seconds + oracle.seconds < 600


# -- 4 -------------------------------------------------------------------------------------------


@criterion(4, "blowup time and place within construction scale")
def test_construction_scale(seeded):
    p = SeedParams()
    b = seeded.diag["blowup"]
    assert b["T"] <= 0.9 * 2 * p.M * p.delta ** (4 / 3)
    assert abs(b["x"]) <= 0.9 * 2 * p.M * p.delta


# -- 5 -------------------------------------------------------------------------------------------


@criterion(5, "cusp exponent 1/3")
def test_cusp_oracle(oracle):
    c = oracle.diag["cusp"]
    assert abs(c["exponent"] - 1 / 3) <= 0.05
    assert c["decades"] >= 1.5


@criterion(5, "cusp exponent 1/3")
@pytest.mark.parametrize("alpha", [0.25, 1 / 3, 0.5])
def test_cusp_self_test(alpha):
    x = np.linspace(-1, 1, 20001)
    fit = cusp_fit(x, -np.sign(x) * np.abs(x) ** alpha, 0.0, 0.0, 1e-4, 0.5)
    assert abs(fit.exponent - alpha) <= 1e-3


# -- 6 -------------------------------------------------------------------------------------------


@criterion(6, "convergence to the rescaled stable profile")
def test_convergence_seeded(seeded):
    c = seeded.diag["convergence"]
    assert c["y_max"] == 1000.0
    assert c["decreasing"]
    assert c["final"] < 0.1


@criterion(6, "convergence to the rescaled stable profile")
@pytest.mark.parametrize("nu", [6.0, 24.0])
def test_convergence_synthetic(nu):
    frames = [synthetic_frame(nu, s) for s in np.linspace(4, 6, 9)]
    assert all(profile_distance(f, nu, 1e3) == 0.0 for f in frames)
    assert convergence_check(frames, nu).distance.max() == 0.0
    assert abs(estimate_nu(frames).nu - nu) <= 0.01 * nu


# -- 7 -------------------------------------------------------------------------------------------


@criterion(7, "modulation constraints on every frame")
@pytest.mark.parametrize("which", ["oracle", "seeded"])
def test_modulation(which, request):
    r = request.getfixturevalue(which)
    m = r.diag["modulation"]
    assert m["n_frames"] == r.diag["window"]["n_in_window"]
    assert m["max_abs_W0"] == 0.0
    assert m["max_abs_dW0_plus_1"] <= 1e-6
    assert m["max_ratio_d2_to_tol"] < 1.0


@criterion(7, "modulation constraints on every frame")
def test_sup_slope_unit(seeded):
    worst = seeded.diag["bootstrap"]["worst"]
    for key in ("sup |W_y| <= 1.01 [global]", "sup |W_y| >= 0.99 [global]"):
        assert worst[key]["margin"] >= 0
        assert worst[key]["skipped_frames"] == 0


# -- 8 -------------------------------------------------------------------------------------------

BOOTSTRAP_ENTRIES = [
    "W~ zeroth [near]",
    "W~ zeroth [middle]",
    "W~ first [near]",
    "W~ first [middle]",
    "W first [far]",
    "W~ second [near]",
    "W second [beyond ell]",
    "W~ third [near]",
    "W~ fourth [near]",
    "W sup [global]",
    "W fourth sup [global]",
    "W~ third at 0 [origin]",
    "Z sup [global]",
    "Z first sup [global]",
    "Z fourth sup [global]",
    "tau [modulation]",
    "xi [modulation]",
    "tau_dot [modulation]",
    "xi_dot [modulation]",
]


@criterion(8, "bootstrap inequalities on every frame")
def test_bootstrap(seeded):
    bs = seeded.diag["bootstrap"]
    assert bs["n_frames"] == seeded.diag["window"]["n_in_window"]
    assert bs["passed"]
    for key in BOOTSTRAP_ENTRIES:
        assert key in bs["worst"], key
        assert bs["worst"][key]["margin"] >= 0, key
    assert min(v["margin"] for v in bs["worst"].values()) >= 0


# -- 9 -------------------------------------------------------------------------------------------


@criterion(9, "Lagrangian trajectory bounds")
def test_lagrangian(seeded):
    lag = seeded.diag["lagrangian"]
    p = SeedParams()
    assert lag["integral_bound"] == pytest.approx(10 * np.log(1 / p.ell))
    rows = [r for r in lag["rows"] if r["family"] == "W"]
    assert len(rows) == 20
    assert all(r["upper_ok"] for r in lag["rows"])
    far = [r for r in rows if abs(r["y0"]) >= p.ell]
    assert far
    assert all(r["lower_ok"] and r["integral_ok"] for r in far)


# -- 10 ------------------------------------------------------------------------------------------


@criterion(10, "lifespan scales like 1/max(eps, beta*)")
@pytest.mark.parametrize("preset", ["eps-sweep", "topo-sine"])
def test_lifespan(sweeps, preset):
    res, _ = sweeps[preset]
    reg = res["regression"]
    assert -1.1 <= reg["slope"] <= -0.9, reg
    assert res["moser"]["passed"] and res["moser"]["variation"] < 3.0
    assert res["moser"]["span_decades"] >= 2.0 - 1e-9


@criterion(10, "lifespan scales like 1/max(eps, beta*)")
def test_lifespan_runtime(sweeps):
    assert sum(t for _, t in sweeps.values()) < 1800


# -- 11 ------------------------------------------------------------------------------------------


def numeric_files(d: Path) -> dict[str, bytes]:
    return {str(p.relative_to(d)): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


@criterion(11, "bit-for-bit reruns, sweeps independent of worker count")
@pytest.mark.parametrize("which", ["oracle", "seeded"])
def test_rerun_identical(which, request, root):
    first = request.getfixturevalue(which)
    saved = root / f"{first.out.name}-first"
    shutil.copytree(first.out, saved)
    again = simulate(first.out.name, first.out)
    a, b = numeric_files(saved), numeric_files(again.out)
    assert a.keys() == b.keys()
    assert [k for k in a if a[k] != b[k]] == []


@criterion(11, "bit-for-bit reruns, sweeps independent of worker count")
@pytest.mark.parametrize("preset", ["eps-sweep", "topo-sine"])
def test_sweep_workers(sweeps, preset, root):
    sweep(preset, root / f"{preset}-serial", workers=1)
    for name in ("sweep.csv", "sweep.json"):
        assert (root / preset / name).read_bytes() == (root / f"{preset}-serial" / name).read_bytes()
