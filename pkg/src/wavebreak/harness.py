"""Run orchestration: seed, solve, renormalise, diagnose, write artifacts."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from . import config as config_mod
from . import diagnostics as dg
from .grid import Grid
from .initial_data import build_seed, perturb_seed, seed_to_physical, seed_to_riemann, verify_seed
from .io import read_csv, sha256, write_columns, write_csv, write_json
from .renormalization import (
    estimate_nu,
    extract_modulation,
    modulation_rates,
    to_frame,
)
from .profile import eval_rescaled
from .solver import Trajectory, run
from .transforms import (
    ModelParams,
    PhysicalState,
    RiemannState,
    Topography,
    moser_scaling_check,
    physical_to_riemann,
    sobolev_seminorm,
)

log = logging.getLogger("wavebreak")

CUSP_TOL = 0.05


class StageError(RuntimeError):
    def __init__(self, stage: str, exc: Exception):
        super().__init__(f"[{stage}] {type(exc).__name__}: {exc}")
        self.stage = stage
        self.exc = exc


@dataclass
class RunManifest:
    config_hash: str
    code_version: str
    grid: dict
    stop_reason: str = ""
    verdict: dict = field(default_factory=dict)
    files: dict = field(default_factory=dict)
    error: dict | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and bool(self.verdict.get("passed", False))

    def to_dict(self) -> dict:
        return asdict(self) | {"passed": self.passed}


def grid_summary(g: Grid) -> dict:
    return {
        "n": g.n,
        "length": g.length,
        "mapping": g.mapping,
        "core": g.core,
        "dx_min": float(g.dx_local.min()),
        "dx_max": float(g.dx_local.max()),
    }


# -- initial data ------------------------------------------------------------------------


@dataclass
class Initial:
    state: RiemannState
    seed_report: object | None = None
    exact_blowup: tuple[float, float] | None = None
    h5: float | None = None


def build_initial(rc: config_mod.RunConfig) -> Initial:
    cfg, g = rc.raw, rc.grid
    kind = cfg["seed.kind"]
    k0 = rc.seed.kappa0
    if kind == "constructed":
        seed = build_seed(rc.seed)
        if float(cfg["seed.perturb_scale"]) > 0:
            rng = np.random.default_rng(int(cfg["seed.rng"]))
            seed = perturb_seed(seed, float(cfg["seed.perturb_scale"]), rng)
        report = verify_seed(seed)
        if rc.model.eps > 0:
            phys = seed_to_physical(seed, rc.topo, rc.model, g)
            state = physical_to_riemann(phys, rc.topo, rc.model)
        else:
            state = seed_to_riemann(seed, g)
        return Initial(state, report)
    if kind == "sine":
        a = float(cfg["seed.amplitude"])
        k = 2 * np.pi / g.length
        w = k0 - a * np.sin(k * g.x)
        T = 1.0 / (a * k)
        return Initial(RiemannState(g, w, np.zeros(g.n)), exact_blowup=(T, k0 * T))
    if kind == "sech":
        zeta = np.cosh(g.x / float(cfg["seed.width"])) ** -2
        vbar = zeta / np.sqrt(rc.model.H)
        state = physical_to_riemann(PhysicalState(g, zeta, vbar), rc.topo, rc.model)
        return Initial(state, h5=_h5(state))
    if kind == "stream":
        # (w, z) = (kappa0, 0): h = (kappa0/3)^2 and u = 2 kappa0/3 over the bottom
        state = RiemannState(g, np.full(g.n, k0), np.zeros(g.n))
        return Initial(state, h5=_h5(state))
    if kind == "files":
        w = np.loadtxt(cfg["seed.files.w"], delimiter=",", ndmin=1)
        z = np.loadtxt(cfg["seed.files.z"], delimiter=",", ndmin=1)
        state = RiemannState(g, w, z)
        state.check_admissible()
        return Initial(state)
    raise config_mod.ConfigError(f"unknown seed kind {kind!r}")


def _h5(state: RiemannState) -> float | None:
    if not state.grid.uniform:
        return None
    g = state.grid
    return float(np.hypot(sobolev_seminorm(state.w - state.w.mean(), 5, g), sobolev_seminorm(state.z - state.z.mean(), 5, g)))


# -- renormalisation ---------------------------------------------------------------------------


def renormalize_run(traj: Trajectory, topo: Topography):
    """Records and frames for every snapshot where extraction succeeds, with their snapshot indices."""
    records, frames, index = [], [], []
    prev = None
    for k, st in enumerate(traj.snapshots):
        try:
            rec = extract_modulation(st, prev)
            fr = to_frame(st, rec, topo)
        except ValueError as exc:
            log.debug("snapshot %d skipped: %s", k, exc)
            continue
        prev = rec.xi
        records.append(rec)
        frames.append(fr)
        index.append(k)
    return records, frames, index


# -- analysis ------------------------------------------------------------------------------


@dataclass
class Analysis:
    records: list
    frames: list
    index: list
    mask: np.ndarray
    reports: dict = field(default_factory=dict)
    verdict: dg.Verdict | None = None
    cusp_state: RiemannState | None = None
    lagrange: list = field(default_factory=list)
    disabled: list = field(default_factory=list)  # plot files whose diagnostic is switched off

    @property
    def window_records(self):
        return [r for r, k in zip(self.records, self.mask) if k]

    @property
    def window_frames(self):
        return [f for f, k in zip(self.frames, self.mask) if k]


def _try(reports: dict, key: str, fn):
    try:
        out = fn()
    except Exception as exc:  # each check reports its own failure, the rest still run
        reports[key] = {"error": f"{type(exc).__name__}: {exc}"}
        return None
    return out


def modulation_constraints(frames) -> dict:
    """``W(0) = 0`` exactly, ``W_y(0) = -1`` within 1e-6, ``|W_yy(0)|`` within the fit tolerance."""
    w0 = np.array([f.W[f.origin] for f in frames])
    d1 = np.array([f.dW[1][f.origin] + 1 for f in frames])
    d2 = np.array([abs(f.dW[2][f.origin]) for f in frames])
    tol = np.array([f.record.fit_tol for f in frames])
    ok0, ok1, ok2 = bool(np.all(w0 == 0)), bool(np.all(np.abs(d1) <= 1e-6)), bool(np.all(d2 <= tol))
    return {
        "n_frames": len(frames),
        "max_abs_W0": float(np.max(np.abs(w0))),
        "max_abs_dW0_plus_1": float(np.max(np.abs(d1))),
        "max_ratio_d2_to_tol": float(np.max(d2 / tol)),
        "W0_exact": ok0,
        "dW0_unit": ok1,
        "d2_within_tol": ok2,
        "passed": ok0 and ok1 and ok2,
    }


def analyze(traj: Trajectory, rc: config_mod.RunConfig, initial: Initial) -> Analysis:
    cfg = rc.raw
    records, frames, index = renormalize_run(traj, rc.topo)
    mask = dg.window_mask(records) if records else np.zeros(0, bool)
    an = Analysis(records, frames, index, mask)
    R, F = an.window_records, an.window_frames
    rep = an.reports
    items: dict[str, dict] = {}
    rep["window"] = {
        "cells": dg.WINDOW_CELLS,
        "n_snapshots": len(traj.snapshots),
        "n_records": len(records),
        "n_in_window": int(mask.sum()),
        "s_range": [float(R[0].s), float(R[-1].s)] if R else None,
        "rule": "tau - t >= (20 dx_local)^(2/3)",
    }
    rep["run"] = {"stop_reason": traj.stop_reason, "steps": len(traj.t) - 1, "mass_drift": traj.mass_drift, "t_final": float(traj.t[-1])}

    snaps = [traj.snapshots[i] for i, k in zip(index, mask) if k]
    win_traj = Trajectory(traj.grid, snaps, frame_speed=traj.frame_speed)

    # (I) blowup time and location
    blow = _try(rep, "blowup", lambda: dg.estimate_blowup(records))
    if blow is not None:
        rep["blowup"] = blow.to_dict()
        M, d = rc.seed.M, rc.seed.delta
        if cfg["seed.kind"] == "constructed":
            tb, xb = 2 * M * d ** (4 / 3), 2 * M * d
            ok = blow.T <= 0.9 * tb and abs(blow.x) <= 0.9 * xb
            items["I"] = {"T_est": blow.T, "x_est": blow.x, "T_bound": tb, "x_bound": xb, "margin_required": 0.1, "passed": ok}
        elif initial.exact_blowup is not None:
            T, x = initial.exact_blowup
            dx = float(traj.grid.dx_local.min())
            ok = abs(blow.T - T) <= 1e-3 * max(1.0, T) and abs(blow.x - x) <= dx
            items["I"] = {"T_est": blow.T, "x_est": blow.x, "T_exact": T, "x_exact": x, "passed": ok}
        else:
            items["I"] = {"T_est": blow.T, "x_est": blow.x, "passed": bool(np.isfinite(blow.T))}
    else:
        items["I"] = {"passed": False, "error": rep["blowup"]["error"]}

    # (II) sup |w| <= M over the resolved part of the run
    t_arr = np.asarray(traj.t)
    t_end = R[-1].t if R else t_arr[-1]
    sup_w = float(np.max(np.asarray(traj.max_abs_w)[t_arr <= t_end]))
    items["II"] = {"sup_abs_w": sup_w, "M": rc.seed.M, "passed": sup_w <= rc.seed.M}

    # (III) rate
    if blow is not None:
        lo, hi = cfg["diag.rate_band"]
        rate = dg.rate_check(win_traj, blow.T, R)
        rep["rate"] = rate.to_dict() | {"band": [lo, hi], "generic_band": [0.5, 2.0]}
        an.reports["_rate_series"] = rate
        items["III"] = {
            "min": rep["rate"]["min"],
            "max": rep["rate"]["max"],
            "band": [lo, hi],
            "continuous": rate.continuous,
            "passed": rate.passed and rate.within(lo, hi) and rate.continuous,
        }
    else:
        items["III"] = {"passed": False, "error": "no blowup estimate"}

    # (IV) cusp, on the last resolved snapshot, centred on its steepest point
    if snaps:
        an.cusp_state = snaps[-1]
        cusp = _try(rep, "cusp", lambda: dg.cusp_fit_state(snaps[-1], R[-1].xi, R[-1].kappa))
        if cusp is not None:
            rep["cusp"] = cusp.to_dict() | {"t": snaps[-1].t, "center": R[-1].xi}
            items["IV"] = {"exponent": cusp.exponent, "ci": [cusp.ci_low, cusp.ci_high], "target": 1 / 3, "tol": CUSP_TOL, "passed": abs(cusp.exponent - 1 / 3) <= CUSP_TOL}
        else:
            items["IV"] = {"passed": False, "error": rep["cusp"]["error"]}
    else:
        items["IV"] = {"passed": False, "error": "no resolved snapshot"}

    # (V) convergence to the rescaled profile
    nu = _try(rep, "nu", lambda: estimate_nu(F))
    if nu is not None:
        rep["nu"] = nu.to_dict()
        conv = dg.convergence_check(F, nu.nu, float(cfg["diag.y_max"]), float(cfg["diag.conv_threshold"]))
        rep["convergence"] = conv.to_dict()
        an.reports["_conv_series"] = conv
        items["V"] = {"nu": nu.nu, "nu_reliable": nu.reliable, "final": conv.final, "threshold": conv.threshold, "y_max": conv.y_max, "decreasing": conv.decreasing, "passed": conv.passed and nu.reliable}
    else:
        items["V"] = {"passed": False, "error": rep["nu"]["error"]}

    checks: dict[str, dict] = {}
    if initial.seed_report is not None:
        checks["seed"] = {"passed": initial.seed_report.passed, "n": len(initial.seed_report.checks)}
        rep["seed"] = initial.seed_report.to_dict()
    if F:
        checks["modulation"] = modulation_constraints(F)
        rep["modulation"] = checks["modulation"]
        rep["transport_residual"] = {
            "y_max": 10.0,
            "sup": _try(rep, "transport_residual_err", lambda: float(np.max(dg.transport_residual(F, R, rc.model.beta_star)))),
        }

    if cfg["diag.bootstrap"] and F:
        rates = modulation_rates(R)
        bs = dg.bootstrap_suite(F, R, rc.seed, rates)
        rep["bootstrap"] = bs.to_dict()
        an.reports["_bootstrap"] = bs
        checks["bootstrap"] = {"passed": bs.passed, "n_frames": len(bs.reports)}
        lag = lagrangian_suite(F, R, rc.seed, int(cfg["diag.n_trajectories"]), rates)
        an.lagrange = lag["paths"]
        rep["lagrangian"] = {k: v for k, v in lag.items() if k != "paths"}
        checks["lagrangian"] = {"passed": lag["passed"]}
    elif not cfg["diag.bootstrap"]:
        an.disabled = ["plot_bootstrap_margins.csv", "plot_lagrangian.csv"]

    an.verdict = dg.Verdict(items | {f"check:{k}": v for k, v in checks.items()})
    return an


def lagrangian_suite(F, R, seed_params, n: int, rates=None) -> dict:
    rates = modulation_rates(R) if rates is None else rates
    out = {"paths": [], "rows": []}
    y_max = min(1e3, 0.5 * F[0].box_y_max)
    y0s = dg.sample_y0(seed_params, y_max, n)
    ok = True
    for fam in ("W", "Z"):
        fld = dg.VelocityField.from_frames(F, R, fam, rates)
        for y0 in y0s:
            p = dg.trace_trajectory(fld, float(y0), seed_params)
            row = {"family": fam} | p.to_dict()
            out["rows"].append(row)
            out["paths"].append((fam, p))
            ok &= p.upper_ok and p.lower_ok is not False and p.integral_ok is not False
    out["passed"] = bool(ok)
    out["n"] = len(y0s)
    out["integral_bound"] = float(10 * np.log(1 / seed_params.ell))
    out["origin_path_max"] = float(np.max(np.abs(out["paths"][0][1].phi)))
    return out


# -- emission ------------------------------------------------------------------------------------


def save_trajectory(traj: Trajectory, out: Path) -> list[Path]:
    files = []
    h = traj.history()
    files.append(write_columns(out / "trajectory.csv", list(h), *h.values()))
    return files


def save_snapshots(traj: Trajectory, out: Path) -> list[Path]:
    art = out / "artifacts"
    art.mkdir(exist_ok=True)
    arr = np.stack([np.stack([s.w, s.z]) for s in traj.snapshots])
    np.save(art / "snapshots.npy", arr, allow_pickle=False)
    meta = {
        "grid": {"n": traj.grid.n, "length": traj.grid.length, "mapping": traj.grid.mapping, "core": traj.grid.core},
        "t": [s.t for s in traj.snapshots],
        "offset": [s.offset for s in traj.snapshots],
        "frame_speed": traj.frame_speed,
        "stop_reason": traj.stop_reason,
    }
    write_json(art / "snapshots.json", meta)
    return [art / "snapshots.npy", art / "snapshots.json"]


def load_snapshots(run_dir) -> Trajectory:
    art = Path(run_dir) / "artifacts"
    meta = json.loads((art / "snapshots.json").read_text())
    gm = meta["grid"]
    g = config_mod.make_grid({"grid.n": gm["n"], "grid.length": gm["length"], "grid.mapping": gm["mapping"], "grid.core": gm["core"]})
    arr = np.load(art / "snapshots.npy")
    snaps = [RiemannState(g, a[0], a[1], t, o) for a, t, o in zip(arr, meta["t"], meta["offset"])]
    traj = Trajectory(g, snaps, frame_speed=meta["frame_speed"], stop_reason=meta["stop_reason"])
    hdr, tab = read_csv(Path(run_dir) / "trajectory.csv")
    for j, name in enumerate(hdr):
        setattr(traj, name, tab[:, j].tolist())
    return traj


def save_analysis(an: Analysis, out: Path) -> list[Path]:
    files = []
    if an.records:
        cols = ["t", "kappa", "tau", "xi", "s", "dy_local", "fit_tol", "slope"]
        rows = [[getattr(r, c) for c in cols] + [bool(k), i] for r, k, i in zip(an.records, an.mask, an.index)]
        files.append(write_csv(out / "modulation.csv", cols + ["in_window", "snapshot"], rows))
    public = {k: v for k, v in an.reports.items() if not k.startswith("_")}
    files.append(write_json(out / "diagnostics.json", public))
    files.append(write_json(out / "verdict.json", an.verdict.to_dict()))
    return files


def emit_plotdata(an: Analysis, out: Path) -> dict:
    """Plot-ready CSVs; returns ``{"files": [...], "absent": [...], "disabled": [...]}``.

    ``absent`` lists plots whose diagnostic ran but produced nothing usable.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    files, absent = [], []
    rate = an.reports.get("_rate_series")
    if rate is not None:
        lo, hi = an.reports["rate"]["band"]
        files.append(write_columns(out / "plot_rate_product.csv", ["t", "product", "band_lo", "band_hi"], rate.t, rate.product, np.full(rate.t.size, lo), np.full(rate.t.size, hi)))
    else:
        absent.append("plot_rate_product.csv")
    conv = an.reports.get("_conv_series")
    if conv is not None:
        files.append(write_columns(out / "plot_convergence.csv", ["s", "sup_distance", "threshold"], conv.s, conv.distance, np.full(conv.s.size, conv.threshold)))
        F = an.window_frames
        picks = sorted({0, len(F) // 2, len(F) - 1})
        for j in picks:
            f = F[j]
            files.append(write_columns(out / f"plot_overlay_{j:03d}.csv", ["y", "W", "Wbar_nu"], f.y, f.W, eval_rescaled(f.y, conv.nu)))
    else:
        absent += ["plot_convergence.csv", "plot_overlay_*.csv"]
    cusp = an.reports.get("cusp", {})
    if an.cusp_state is not None and "exponent" in cusp:
        st = an.cusp_state
        g = st.grid
        loc = float(g.wrap(cusp["center"] - st.offset))
        r, dw = dg.cusp_pairs(g.x, st.w, loc, an.window_records[-1].kappa, cusp["inner"], cusp["outer"])
        keep = dw > 0
        files.append(write_columns(out / "plot_cusp_pairs.csv", ["log10_r", "log10_dw", "r", "dw"], np.log10(r[keep]), np.log10(dw[keep]), r[keep], dw[keep]))
    else:
        absent.append("plot_cusp_pairs.csv")
    bs = an.reports.get("_bootstrap")
    if bs is not None:
        rows = [[r.s, e.ineq, e.region, e.margin, e.skipped] for r in bs.reports for e in r.entries]
        files.append(write_csv(out / "plot_bootstrap_margins.csv", ["s", "inequality", "region", "margin", "skipped"], rows))
    elif "plot_bootstrap_margins.csv" not in an.disabled:
        absent.append("plot_bootstrap_margins.csv")
    if an.lagrange:
        rows = [[fam, p.y0, s, phi] for fam, p in an.lagrange for s, phi in zip(p.s, p.phi)]
        files.append(write_csv(out / "plot_lagrangian.csv", ["family", "y0", "s", "phi"], rows))
    elif "plot_lagrangian.csv" not in an.disabled:
        absent.append("plot_lagrangian.csv")
    return {"files": files, "absent": absent, "disabled": list(an.disabled)}


def write_manifest(out: Path, manifest: RunManifest) -> Path:
    files = sorted(p for p in out.rglob("*") if p.is_file() and p.name != "manifest.json")
    manifest.files = {str(p.relative_to(out)): sha256(p) for p in files}
    return write_json(out / "manifest.json", manifest.to_dict())


# -- entry points ------------------------------------------------------------------------------


def run_single(cfg: dict, out: Path | None = None) -> RunManifest:
    """Full pipeline for one configuration; stage failures are recorded in the manifest."""
    out = Path(out) if out is not None else config_mod.output_dir(cfg)
    rc = config_mod.RunConfig.from_flat(cfg)  # validation errors surface before any work
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.yaml").write_text(config_mod.dump(cfg))
    manifest = RunManifest(config_mod.config_hash(cfg), __version__, grid_summary(rc.grid))
    stage = "seed"
    try:
        initial = build_initial(rc)
        if initial.seed_report is not None:
            write_json(out / "seed_report.json", initial.seed_report.to_dict())
        stage = "solve"
        log.info("solving on %d nodes", rc.grid.n)
        traj = run(initial.state, rc.topo, rc.model, rc.solver)
        manifest.stop_reason = traj.stop_reason
        save_trajectory(traj, out)
        if cfg["run.save_snapshots"]:
            save_snapshots(traj, out)
        stage = "diagnostics"
        an = analyze(traj, rc, initial)
        save_analysis(an, out)
        stage = "plotdata"
        emitted = emit_plotdata(an, out)
        manifest.verdict = {"passed": an.verdict.passed, "items": {k: bool(v["passed"]) for k, v in an.verdict.items.items()}, "absent_plots": emitted["absent"]}
    except Exception as exc:
        manifest.error = {"stage": stage, "message": f"{type(exc).__name__}: {exc}"}
        log.error("stage %s failed: %s", stage, exc)
    write_manifest(out, manifest)
    return manifest


def replot(run_dir) -> dict:
    """Recompute diagnostics from saved snapshots and re-emit the plot CSVs."""
    run_dir = Path(run_dir)
    cfg = config_mod.load_file(run_dir / "config.yaml")
    rc = config_mod.RunConfig.from_flat(cfg)
    traj = load_snapshots(run_dir)
    initial = build_initial(rc)
    an = analyze(traj, rc, initial)
    return emit_plotdata(an, run_dir) | {"passed": an.verdict.passed}


# -- sweeps ---------------------------------------------------------------------------------------


def front_amplitude(state: RiemannState, topo: Topography, model: ModelParams) -> float:
    """Height of the front that will steepen: data range, or the topographic forcing scale."""
    b = topo(state.x_phys)
    return float(max(np.ptp(state.w), np.ptp(state.z), 0.75 * model.beta_star * np.ptp(b)))


def lifespan_point(cfg: dict) -> dict:
    """Breaking time for one sweep point (no frames, no bootstrap).

    The run stops once ``m = -1/min slope`` passes half the amplitude-scaled
    resolution floor; ``T*`` is extrapolated from the resolved history.
    """
    eps, beta = float(cfg["model.eps"]), float(cfg["model.beta_star"])
    row = {"eps": eps, "beta_star": beta, "status": "ok", "T_est": None, "x_est": None, "h5": None, "stop_reason": "", "steps": 0}
    if max(eps, beta) == 0.0:
        row["status"] = "no steepening"
        return row
    try:
        rc = config_mod.RunConfig.from_flat(cfg)
        initial = build_initial(rc)
        row["h5"] = initial.h5
        amp = front_amplitude(initial.state, rc.topo, rc.model)
        if amp == 0.0:
            row["status"] = "no steepening"
            return row
        m_floor = dg.amplitude_floor(float(rc.grid.dx_local.max()), amp)
        traj = run(initial.state, rc.topo, rc.model, replace(rc.solver, stop_m=0.5 * m_floor))
        h = traj.history()
        row["stop_reason"] = traj.stop_reason
        row["steps"] = len(h["t"]) - 1
        if traj.stop_reason not in ("slope", "slope_z", "resolution"):
            row["status"] = f"no breaking ({traj.stop_reason})"
            return row
        slope = np.minimum(h["min_slope"], h["min_slope_z"])
        row["T_est"] = dg.breaking_time_from_history(h["t"], slope, m_floor, float(cfg["sweep.decades"]))
        row["x_est"] = float(h["argmin"][-1])
    except Exception as exc:
        row["status"] = f"error: {type(exc).__name__}: {exc}"
    return row


def sweep_configs(cfg: dict) -> list[dict]:
    axis = cfg["sweep.axis"]
    out = []
    for v in cfg["sweep.values"]:
        c = dict(cfg)
        v = float(v)
        if axis == "eps":
            c["model.eps"] = v
        else:
            c["model.beta_star"] = v
        amp = max(float(c["model.eps"]), float(c["model.beta_star"]))
        if amp > 0 and not np.isfinite(float(c["solver.t_max"])):
            c["solver.t_max"] = float(cfg["sweep.t_max_factor"]) / amp
        out.append(c)
    return out


def moser_for(cfg: dict):
    """``H^5`` scaling of the transformed data along the sweep axis (sech^2 shape, or lake at rest over the bottom)."""
    rc = config_mod.RunConfig.from_flat(cfg)
    g = rc.grid
    zeta = np.cosh(g.x / float(cfg["seed.width"])) ** -2
    vbar = zeta / np.sqrt(rc.model.H)
    base = rc.model
    vals = [float(v) for v in cfg["sweep.moser_values"]]
    if cfg["sweep.axis"] == "eps":
        plist = [ModelParams(base.H, v, 0.0, base.h_min) for v in vals]
    else:
        plist = [ModelParams(base.H, 0.0, v, base.h_min) for v in vals]
    return moser_scaling_check(zeta, vbar, rc.topo, plist, g)


def run_sweep(cfg: dict, out: Path | None = None) -> dict:
    """Independent lifespan runs along one axis; rows aggregated in axis order."""
    out = Path(out) if out is not None else config_mod.output_dir(cfg)
    config_mod.validate(cfg)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.yaml").write_text(config_mod.dump(cfg))
    cfgs = sweep_configs(cfg)
    workers = int(cfg["sweep.workers"])
    if workers == 1:
        rows = [lifespan_point(c) for c in cfgs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(lifespan_point, cfgs))
    header = ["index", "eps", "beta_star", "T_est", "x_est", "h5", "status", "stop_reason", "steps"]
    write_csv(out / "sweep.csv", header, [[i] + [r[k] for k in header[1:]] for i, r in enumerate(rows)])
    result: dict = {"axis": cfg["sweep.axis"], "n": len(rows), "excluded": [i for i, r in enumerate(rows) if r["status"] != "ok"]}
    pts = [(r["eps"], r["beta_star"], r["T_est"]) for r in rows if r["status"] == "ok"]
    try:
        fit = dg.lifespan_regression(pts, min_decades=float(cfg["sweep.min_decades"]))
        result["regression"] = fit.to_dict()
    except dg.InsufficientRangeError as exc:
        result["regression"] = {"error": str(exc), "passed": False}
    mos = moser_for(cfg)
    result["moser"] = mos.to_dict()
    result["passed"] = bool(result["regression"].get("passed")) and mos.passed
    write_json(out / "sweep.json", result)
    manifest = RunManifest(config_mod.config_hash(cfg), __version__, grid_summary(config_mod.make_grid(cfg)), verdict={"passed": result["passed"]})
    write_manifest(out, manifest)
    return result
