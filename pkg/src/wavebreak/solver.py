"""Method-of-lines solver for the diagonal Riemann-invariant system

    w_t + (w + z/3) w_x = -3/4 beta b_x
    z_t + (w/3 + z) z_x = -3/4 beta b_x

with RK4 in time and 5th-order upwind-biased differences, plus an exact
characteristics solution for the Burgers reduction (``z`` constant, flat bottom).

Runs may use a frame translating at constant speed ``c``: the grid origin sits at
physical ``offset(t) = offset0 + c (t - t0)`` and both transport speeds are
reduced by ``c``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .grid import Grid
from .transforms import ModelParams, RiemannState, Topography, from_riemann


class SolverError(RuntimeError):
    pass


class VacuumError(SolverError):
    pass


class InstabilityError(SolverError):
    pass


class ValidityError(ValueError):
    """Requested time at or beyond the exact breaking time."""


class RootError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    cfl: float = 0.4
    stop_slope_factor: float = 0.05
    snapshots_per_decade: float = 46.0  # about 0.05 in s per snapshot
    t_max: float = np.inf
    max_steps: int = 2_000_000
    frame_speed: float = 0.0
    # also stop when the z family steepens past the threshold
    watch_z: bool = True
    # stop once -1/min slope (either watched family) drops to this value; 0 disables
    stop_m: float = 0.0

    def __post_init__(self):
        if not 0 < self.cfl <= 0.5:
            raise ValueError(f"cfl must lie in (0, 0.5], got {self.cfl}")
        if not 0 < self.stop_slope_factor < 1:
            raise ValueError("stop_slope_factor must lie in (0, 1)")
        if not self.snapshots_per_decade > 0:
            raise ValueError("snapshots_per_decade must be positive")


def _speeds(w, z, c):
    return w + z / 3 - c, w / 3 + z - c


def rhs(state: RiemannState, topo: Topography, params: ModelParams, c: float = 0.0, offset=None):
    """Time derivatives ``(w_t, z_t)`` in a frame moving with speed ``c``."""
    g = state.grid
    w, z = state.w, state.z
    lw, lz = _speeds(w, z, c)
    dw = -lw * g.ddx_upwind(w, lw)
    dz = -lz * g.ddx_upwind(z, lz)
    if params.beta_star != 0.0 and topo.family != "flat":
        off = state.offset if offset is None else offset
        src = -0.75 * params.beta_star * topo.deriv(g.x + off, 1)
        dw = dw + src
        dz = dz + src
    return dw, dz


def stable_dt(state: RiemannState, cfg: SolverConfig) -> float:
    """``cfl * min(dx_i / |speed_i|)`` over both families (local spacing on mapped grids)."""
    lw, lz = _speeds(state.w, state.z, cfg.frame_speed)
    speed = np.maximum(np.abs(lw), np.abs(lz))
    rate = np.max(speed / state.grid.dx_local)
    if not np.isfinite(rate):
        raise InstabilityError("non-finite transport speed")
    if rate == 0.0:
        return np.inf
    return cfg.cfl / rate


def step(state: RiemannState, topo: Topography, params: ModelParams, cfg: SolverConfig, dt: float | None = None) -> RiemannState:
    """One classical RK4 step; returns a new state."""
    c = cfg.frame_speed
    if dt is None:
        dt = stable_dt(state, cfg)
        if not np.isfinite(dt):
            dt = cfg.t_max - state.t if np.isfinite(cfg.t_max) else 1.0
    gap = state.w - state.z
    if not np.all(gap > 0):
        i = int(np.argmin(gap))
        raise VacuumError(f"vacuum at node {i}: w - z = {gap[i]:.3e}")
    g, t0, off0 = state.grid, state.t, state.offset

    def stage(w, z, frac):
        s = RiemannState.__new__(RiemannState)
        s.grid, s.w, s.z = g, w, z
        s.t, s.offset, s.carry = t0 + frac * dt, off0 + c * frac * dt, None
        return rhs(s, topo, params, c)

    k1w, k1z = stage(state.w, state.z, 0.0)
    k2w, k2z = stage(state.w + 0.5 * dt * k1w, state.z + 0.5 * dt * k1z, 0.5)
    k3w, k3z = stage(state.w + 0.5 * dt * k2w, state.z + 0.5 * dt * k2z, 0.5)
    k4w, k4z = stage(state.w + dt * k3w, state.z + dt * k3z, 1.0)
    # Kahan-compensated updates: long runs add many tiny increments to O(1)
    # fields, and rounding drift in the clock alone would shift the solution
    cw, cz, ct, co = state.carry if state.carry is not None else (0.0, 0.0, 0.0, 0.0)
    inc_w = dt / 6 * (k1w + 2 * k2w + 2 * k3w + k4w) - cw
    inc_z = dt / 6 * (k1z + 2 * k2z + 2 * k3z + k4z) - cz
    inc_t = dt - ct
    inc_o = c * dt - co
    w = state.w + inc_w
    z = state.z + inc_z
    t1 = t0 + inc_t
    off1 = off0 + inc_o
    carry = ((w - state.w) - inc_w, (z - state.z) - inc_z, (t1 - t0) - inc_t, (off1 - off0) - inc_o)
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(z))):
        raise InstabilityError(f"non-finite values after step at t = {t0:.6g}")
    return RiemannState(g, w, z, t1, off1, carry)


# -- trajectories --------------------------------------------------------------


def min_slope(grid: Grid, f, hint=None):
    """``(min f_x, physical argmin on the grid, node index)`` using central differences."""
    d = grid.ddx(f)
    i, x = grid.argmin_subgrid(d, hint)
    return float(d[i]), x, i


def mass(state: RiemannState) -> float:
    h, _ = from_riemann(state)
    return state.grid.integrate(h)


@dataclass
class Trajectory:
    grid: Grid
    snapshots: list[RiemannState] = field(default_factory=list)
    t: list[float] = field(default_factory=list)
    min_slope: list[float] = field(default_factory=list)
    argmin: list[float] = field(default_factory=list)  # physical position
    min_slope_z: list[float] = field(default_factory=list)
    mass: list[float] = field(default_factory=list)
    max_abs_w: list[float] = field(default_factory=list)
    stop_reason: str = ""
    frame_speed: float = 0.0

    def history(self) -> dict[str, np.ndarray]:
        return {
            "t": np.asarray(self.t),
            "min_slope": np.asarray(self.min_slope),
            "argmin": np.asarray(self.argmin),
            "min_slope_z": np.asarray(self.min_slope_z),
            "mass": np.asarray(self.mass),
            "max_abs_w": np.asarray(self.max_abs_w),
        }

    @property
    def mass_drift(self) -> float:
        m = np.asarray(self.mass)
        return float(np.max(np.abs(m - m[0])) / abs(m[0]))

    def snapshot_times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    def save(self, directory, stride: int = 1):
        """Columnar ``x,w,z`` CSV per snapshot plus a JSON sidecar with the per-step series."""
        from pathlib import Path

        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        files = []
        for k, s in enumerate(self.snapshots[::stride]):
            name = out / f"snapshot_{k:04d}.csv"
            np.savetxt(name, np.column_stack([s.x_phys, s.w, s.z]), delimiter=",", header="x,w,z", comments="", fmt="%.17g")
            files.append(name.name)
        side = {
            "stop_reason": self.stop_reason,
            "frame_speed": self.frame_speed,
            "grid": {"n": self.grid.n, "length": self.grid.length, "mapping": self.grid.mapping, "core": self.grid.core},
            "snapshots": [{"file": f, "t": s.t, "offset": s.offset} for f, s in zip(files, self.snapshots[::stride])],
            "series": {k: v.tolist() for k, v in self.history().items()},
        }
        (out / "trajectory.json").write_text(json.dumps(side))
        return [out / f for f in files] + [out / "trajectory.json"]


def run(initial: RiemannState, topo: Topography, params: ModelParams, cfg: SolverConfig) -> Trajectory:
    """March until the slope of ``w`` (or ``z``) passes ``-stop_slope_factor / dx`` or ``t_max``.

    Snapshots are taken on a geometric ladder in ``m = -1 / min w_x`` (an
    estimate of the time left before breaking) with ``snapshots_per_decade``
    rungs per decade; the initial and final states are always kept.
    """
    g = initial.grid
    traj = Trajectory(g, frame_speed=cfg.frame_speed)
    ratio = 10 ** (-1 / cfg.snapshots_per_decade)
    state = initial
    hint = None
    next_m = None
    nsteps = 0

    while True:
        slope, x_arg, i_arg = min_slope(g, state.w, hint)
        hint = x_arg
        slope_z, _, i_z = min_slope(g, state.z)
        traj.t.append(state.t)
        traj.min_slope.append(slope)
        traj.argmin.append(x_arg + state.offset)
        traj.min_slope_z.append(slope_z)
        traj.mass.append(mass(state))
        traj.max_abs_w.append(float(np.max(np.abs(state.w))))

        m = -1.0 / slope if slope < 0 else np.inf
        if next_m is None:
            traj.snapshots.append(state)
            next_m = m * ratio
        elif m <= next_m:
            traj.snapshots.append(state)
            if not np.isfinite(next_m):
                next_m = m  # flat start: the ladder begins at the first steepening
            while next_m >= m:
                next_m *= ratio

        stop = None
        if slope <= -cfg.stop_slope_factor / g.dx_local[i_arg]:
            stop = "slope"
        elif cfg.watch_z and slope_z <= -cfg.stop_slope_factor / g.dx_local[i_z]:
            stop = "slope_z"
        elif cfg.stop_m > 0 and min(slope, slope_z if cfg.watch_z else 0.0) <= -1.0 / cfg.stop_m:
            stop = "resolution"
        elif state.t >= cfg.t_max:
            stop = "t_max"
        elif nsteps >= cfg.max_steps:
            stop = "max_steps"
        if stop:
            if traj.snapshots[-1] is not state:
                traj.snapshots.append(state)
            traj.stop_reason = stop
            return traj

        dt = stable_dt(state, cfg)
        if state.t + dt >= cfg.t_max:
            ct = state.carry[2] if state.carry is not None else 0.0
            dt = (cfg.t_max - state.t) + ct
        state = step(state, topo, params, cfg, dt)
        nsteps += 1


def run_to(initial: RiemannState, topo: Topography, params: ModelParams, cfg: SolverConfig, t_end: float) -> RiemannState:
    """Final state at exactly ``t_end`` (no stop criteria, no bookkeeping)."""
    state = initial
    while state.t < t_end:
        dt = stable_dt(state, cfg)
        if state.t + dt >= t_end:
            ct = state.carry[2] if state.carry is not None else 0.0
            dt = (t_end - state.t) + ct
        state = step(state, topo, params, cfg, dt)
    return state


# -- exact Burgers characteristics -----------------------------------------------


def _fd_slope(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    hh = h * np.maximum(1.0, np.abs(x))
    return (f(x + hh) - f(x - hh)) / (2 * hh)


def burgers_breaking_time(w0, xs, dw0=None) -> float:
    """``-1 / min w0'`` over sample points ``xs`` (``inf`` if ``w0`` never decreases)."""
    slope = dw0(xs) if dw0 is not None else _fd_slope(w0, xs)
    m = float(np.min(slope))
    return -1.0 / m if m < 0 else np.inf


def burgers_exact(w0, zbar: float, x, t: float, dw0=None, t_star: float | None = None, span: float = 20.0, tol: float = 1e-14):
    """Solution of ``w_t + (w + zbar/3) w_x = 0`` with ``w(., 0) = w0`` by characteristics.

    Solves ``x = x0 + t (w0(x0) + zbar/3)`` for the foot ``x0`` with Newton's
    method safeguarded by a bracket (bisection fallback) and returns ``w0(x0)``.
    ``t_star`` defaults to ``-1/min w0'`` sampled on ``[min x - span, max x + span]``.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if t_star is None:
        xs = np.linspace(x.min() - span, x.max() + span, 200001)
        t_star = burgers_breaking_time(w0, xs, dw0)
    if t >= t_star:
        raise ValidityError(f"t = {t} is not before the breaking time {t_star}")
    if t == 0:
        out = np.asarray(w0(x), dtype=float) * np.ones_like(x)
        return out[0] if scalar else out
    shift = zbar / 3
    slope = dw0 if dw0 is not None else (lambda q: _fd_slope(w0, q))

    def F(x0):
        return x0 + t * (w0(x0) + shift) - x

    # bracket: F is increasing in x0 before breaking
    guess = x - t * (np.asarray(w0(x)) + shift)
    width = np.full_like(x, max(1.0, abs(t)))
    lo, hi = guess - width, guess + width
    for _ in range(200):
        bad = (F(lo) > 0) | (F(hi) < 0)
        if not bad.any():
            break
        lo = np.where(bad, lo - width, lo)
        hi = np.where(bad, hi + width, hi)
        width = width * 2
    else:
        raise RootError("could not bracket the characteristic foot")

    x0 = np.clip(guess, lo, hi)
    scale = np.maximum(1.0, np.abs(x))
    for _ in range(200):
        f = F(x0)
        conv = np.abs(f) <= tol * scale
        if conv.all():
            break
        lo = np.where(f < 0, x0, lo)
        hi = np.where(f > 0, x0, hi)
        fp = 1 + t * slope(x0)
        newton = x0 - f / np.where(fp > 0, fp, np.nan)
        ok = np.isfinite(newton) & (newton > lo) & (newton < hi)
        x0 = np.where(conv, x0, np.where(ok, newton, 0.5 * (lo + hi)))
        if np.all(hi - lo <= 4 * np.finfo(float).eps * scale):
            break
    else:
        raise RootError("Newton iteration did not converge")
    out = np.asarray(w0(x0), dtype=float)
    return out[0] if scalar else out


def exact_state(w0, zbar: float, grid: Grid, t: float, offset: float = 0.0, **kw) -> RiemannState:
    """Grid state of the exact Burgers solution at time ``t``."""
    x = grid.x + offset
    w = burgers_exact(w0, zbar, x, t, **kw)
    return RiemannState(grid, w, np.full(grid.n, float(zbar)), t, offset)


def with_frame(cfg: SolverConfig, speed: float) -> SolverConfig:
    return replace(cfg, frame_speed=float(speed))


def config_dict(cfg: SolverConfig) -> dict:
    d = asdict(cfg)
    d["t_max"] = None if not np.isfinite(cfg.t_max) else cfg.t_max
    return d
