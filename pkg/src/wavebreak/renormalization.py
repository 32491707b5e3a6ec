"""Modulation variables and self-similar frames.

Given a snapshot ``w(x, t)``, the blowup tracker is fixed by three conditions at
the steepest point ``xi``: ``w_xx(xi) = 0`` (so ``xi`` is the minimiser of the
slope), ``kappa = w(xi)`` and ``w_x(xi) = -1 / (tau - t)``.  With
``s = -log(tau - t)`` and ``y = (x - xi) e^{3s/2}`` the frame is

    W(y) = e^{s/2} (w(x) - kappa),    Z(y) = z(x),

which satisfies ``W(0) = 0``, ``W'(0) = -1``, ``W''(0) = 0``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import profile
from .grid import Grid
from .transforms import RiemannState, Topography

N_DERIV = 4


class NotSteepeningError(ValueError):
    pass


class ProximityError(ValueError):
    pass


class InsufficientHistoryError(ValueError):
    pass


@dataclass
class ModulationRecord:
    t: float
    kappa: float
    tau: float
    xi: float  # physical position
    s: float
    # local self-similar spacing at the origin and the resulting constraint tolerance
    dy_local: float = np.nan
    fit_tol: float = np.nan
    # raw slope data at xi, kept so the rate product can be recomputed
    slope: float = np.nan

    def to_dict(self) -> dict:
        return {k: float(v) for k, v in self.__dict__.items()}


def _local_x(state: RiemannState, x_phys):
    return state.grid.wrap(np.asarray(x_phys) - state.offset)


def extract_modulation(state: RiemannState, prev_xi: float | None = None, newton_iters: int = 8) -> ModulationRecord:
    """Read ``(kappa, tau, xi, s)`` off one snapshot.

    ``xi`` starts from a three-point parabola through the discrete slope minimum
    (ties resolved toward ``prev_xi``) and is refined by Newton steps on the
    interpolated ``w_xx = 0``, kept within one cell of the start.
    """
    g = state.grid
    d1 = g.ddx(state.w)
    hint = None if prev_xi is None else float(_local_x(state, prev_xi))
    i, x = g.argmin_subgrid(d1, hint)
    if d1[i] >= 0:
        raise NotSteepeningError(f"minimum slope {d1[i]:.3e} is not negative")
    if min(i, g.n - 1 - i) < 3:
        raise ProximityError(f"steepest point at node {i} lies within 3 cells of the box edge")

    # differentiate relative to the local value so rounding scales with the cusp, not the background
    w0 = state.w[i]
    _, d1, d2, d3, d4 = g.derivatives(state.w - w0, 4)
    lo, hi = g.x[(i - 1) % g.n], g.x[(i + 1) % g.n]
    for _ in range(newton_iters):
        a2 = float(g.interp(d2, x))
        a3 = float(g.interp(d3, x))
        if a3 <= 0:
            break
        x_new = float(np.clip(x - a2 / a3, lo, hi))
        if abs(x_new - x) <= 1e-15 * max(1.0, abs(x)):
            x = x_new
            break
        x = x_new

    slope = float(g.interp(d1, x))
    if slope >= 0:
        raise NotSteepeningError("interpolated slope at the steepest point is not negative")
    kappa = float(g.interp(state.w - w0, x)) + w0
    m = -1.0 / slope
    s = -np.log(m)
    dx_loc = float(g.jac_of_q(g.q_of_x(x)) * g.dq)
    dy = dx_loc / m**1.5
    w4 = abs(float(g.interp(d4, x))) * m**5.5  # |d^4_y W(0)|
    tol = dy * dy * max(1.0, w4)
    return ModulationRecord(state.t, kappa, state.t + m, float(x + state.offset), float(s), dy, tol, slope)


# -- modulation rates -----------------------------------------------------------


@dataclass
class ModulationRates:
    tau_dot: float
    xi_dot: float
    kappa_dot: float

    @property
    def beta_tau(self) -> float:
        return 1.0 / (1.0 - self.tau_dot)


def modulation_rates(records: list[ModulationRecord]) -> list[ModulationRates]:
    """Centered (one-sided at the ends) differences of ``tau, xi, kappa`` in ``t``."""
    if len(records) < 2:
        raise InsufficientHistoryError("need at least two records to difference modulation variables")
    t = np.array([r.t for r in records])
    if np.any(np.diff(t) <= 0):
        raise ValueError("records must be strictly increasing in t")
    order = 2 if len(records) >= 3 else 1
    out = {}
    for name in ("tau", "xi", "kappa"):
        v = np.array([getattr(r, name) for r in records])
        out[name] = np.gradient(v, t, edge_order=order) if len(records) >= 3 else np.full(len(t), (v[1] - v[0]) / (t[1] - t[0]))
    return [ModulationRates(a, b, c) for a, b, c in zip(out["tau"], out["xi"], out["kappa"])]


def s_consistency(records: list[ModulationRecord]) -> np.ndarray:
    """Relative mismatch between ``ds/dt`` and ``(1 - tau_dot) / (tau - t)``, both differenced."""
    t = np.array([r.t for r in records])
    s = np.array([r.s for r in records])
    ds = np.gradient(s, t, edge_order=2)
    rates = modulation_rates(records)
    pred = np.array([(1 - q.tau_dot) / (r.tau - r.t) for q, r in zip(rates, records)])
    return np.abs(ds - pred) / np.abs(pred)


# -- frames --------------------------------------------------------------------------


def log_y_grid(y_max: float, y_min: float = 1e-3, per_decade: int = 64) -> np.ndarray:
    """``0`` plus symmetric log-spaced nodes ``y_min .. y_max``."""
    if y_max <= y_min:
        pos = np.array([y_min])
    else:
        n = int(np.ceil(np.log10(y_max / y_min) * per_decade)) + 1
        pos = np.geomspace(y_min, y_max, n)
    return np.concatenate([-pos[::-1], [0.0], pos])


@dataclass
class SelfSimilarFrame:
    y: np.ndarray
    W: np.ndarray
    Z: np.ndarray
    s: float
    t: float = np.nan
    # dW[k], dZ[k]: k-th y-derivative on the frame grid
    dW: dict = field(default_factory=dict)
    dZ: dict = field(default_factory=dict)
    B: np.ndarray | None = None
    record: ModulationRecord | None = None
    truncated: bool = False
    box_y_max: float = np.inf

    @property
    def origin(self) -> int:
        return int(np.argmin(np.abs(self.y)))

    def W_tilde(self):
        return self.W - profile.eval_profile(self.y)

    def dW_tilde(self, k: int):
        return self.dW[k] - profile.eval_profile_deriv(self.y, k)

    def to_columns(self) -> np.ndarray:
        return np.column_stack([self.y, self.W, self.Z])

    def sidecar(self, nu: float | None = None) -> dict:
        d = {"t": self.t, "s": self.s, "truncated": self.truncated, "box_y_max": self.box_y_max}
        if self.record is not None:
            d.update({k: self.record.to_dict()[k] for k in ("kappa", "tau", "xi")})
        if nu is not None:
            d["nu_estimate"] = nu
        return d

    def save(self, stem, nu: float | None = None):
        np.savetxt(f"{stem}.csv", self.to_columns(), delimiter=",", header="y,W,Z", comments="", fmt="%.17g")
        with open(f"{stem}.json", "w") as fh:
            json.dump(self.sidecar(nu), fh)


def to_frame(state: RiemannState, mod: ModulationRecord, topo: Topography | None = None, y_grid=None, per_decade: int = 64) -> SelfSimilarFrame:
    """Renormalise one snapshot around ``mod``.

    Values and y-derivatives up to order 4 come from central differences on the
    physical grid, interpolated (quintic) to ``x(y) = xi + y e^{-3s/2}``.
    """
    g: Grid = state.grid
    scale = np.exp(-1.5 * mod.s)  # physical length of one y unit
    xi_loc = float(_local_x(state, mod.xi))
    edge = 4 * float(np.max(g.dx_local[[0, -1]]))
    box_y = (g.length / 2 - abs(xi_loc) - edge) / scale
    truncated = False
    if y_grid is None:
        y = log_y_grid(box_y, per_decade=per_decade)
    else:
        y = np.asarray(y_grid, dtype=float)
        if np.max(np.abs(y)) > box_y:
            truncated = True
            y = y[np.abs(y) <= box_y]
    x = xi_loc + y * scale

    fw = g.derivatives(state.w - mod.kappa, N_DERIV)
    fz = g.derivatives(state.z - state.z[0], N_DERIV)
    e_half = np.exp(0.5 * mod.s)
    W = e_half * g.interp(fw[0], x)
    i0 = int(np.argmin(np.abs(y)))
    if y[i0] == 0.0:
        W[i0] = 0.0  # exact by construction of kappa
    dW = {k: e_half * scale**k * g.interp(fw[k], x) for k in range(1, N_DERIV + 1)}
    Z = g.interp(fz[0], x) + state.z[0]
    dZ = {k: scale**k * g.interp(fz[k], x) for k in range(1, N_DERIV + 1)}
    B = None
    if topo is not None:
        B = topo.deriv(x + state.offset, 1)
    return SelfSimilarFrame(y, W, Z, mod.s, state.t, dW, dZ, B, mod, truncated, float(box_y))


def renormalize(snapshots: list[RiemannState], topo: Topography | None = None, per_decade: int = 64):
    """Records and frames for a snapshot sequence (``xi`` kept continuous)."""
    records, frames = [], []
    prev = None
    for st in snapshots:
        rec = extract_modulation(st, prev)
        prev = rec.xi
        records.append(rec)
        frames.append(to_frame(st, rec, topo, per_decade=per_decade))
    return records, frames


# -- resampling --------------------------------------------------------------------


def _lagrange_nonuniform(xn, f, xq, npts=6):
    xq = np.asarray(xq, dtype=float)
    n = xn.size
    j = np.searchsorted(xn, xq) - npts // 2
    j = np.clip(j, 0, n - npts)
    idx = j[:, None] + np.arange(npts)[None, :]
    xs, fs = xn[idx], f[idx]
    out = np.zeros(xq.shape)
    for a in range(npts):
        la = np.ones(xq.shape)
        for b in range(npts):
            if a != b:
                la = la * (xq - xs[:, b]) / (xs[:, a] - xs[:, b])
        out += la * fs[:, a]
    return out


def resample_frame(frame: SelfSimilarFrame, y_new) -> SelfSimilarFrame:
    """Quintic Lagrange resampling onto ``y_new`` (within the frame's range)."""
    y_new = np.asarray(y_new, dtype=float)
    keep = (y_new >= frame.y[0]) & (y_new <= frame.y[-1])
    y_new = y_new[keep]
    fn = lambda f: _lagrange_nonuniform(frame.y, f, y_new)  # noqa: E731
    dW = {k: fn(v) for k, v in frame.dW.items()}
    dZ = {k: fn(v) for k, v in frame.dZ.items()}
    B = None if frame.B is None else fn(frame.B)
    return SelfSimilarFrame(
        y_new, fn(frame.W), fn(frame.Z), frame.s, frame.t, dW, dZ, B, frame.record,
        frame.truncated or not keep.all(), frame.box_y_max,
    )


def synthetic_frame(nu: float, s: float, y_max: float = 1e4, per_decade: int = 64, Z=None) -> SelfSimilarFrame:
    """Frame with ``W := Wbar_nu`` (and ``Z`` given or zero) for estimator checks."""
    y = log_y_grid(y_max, per_decade=per_decade)
    W = profile.eval_rescaled(y, nu)
    dW = {k: profile.eval_rescaled_deriv(y, nu, k) for k in range(1, N_DERIV + 1)}
    Zf = np.zeros_like(y) if Z is None else np.asarray(Z(y), dtype=float)
    dZ = {k: np.zeros_like(y) for k in range(1, N_DERIV + 1)}
    return SelfSimilarFrame(y, W, Zf, s, np.nan, dW, dZ)


# -- nu ------------------------------------------------------------------------------


def fornberg_weights(x0: float, xs, m: int) -> np.ndarray:
    """Finite-difference weights for the ``m``-th derivative at ``x0`` from nodes ``xs``."""
    xs = np.asarray(xs, dtype=float)
    n = xs.size
    c = np.zeros((n, m + 1))
    c1, c4 = 1.0, xs[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, xs[i] - x0
        for j in range(i):
            c3 = xs[i] - xs[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


def third_derivative_at_origin(frame: SelfSimilarFrame, use_stored: bool = True) -> float:
    """``d^3_y W(0)``: the stored derivative when present, else a 7-point centered stencil."""
    i0 = frame.origin
    if use_stored and 3 in frame.dW:
        return float(frame.dW[3][i0])
    idx = np.arange(i0 - 3, i0 + 4)
    wts = fornberg_weights(frame.y[i0], frame.y[idx], 3)
    return float(wts @ frame.W[idx])


@dataclass
class NuEstimate:
    nu: float
    uncertainty: float
    reliable: bool
    s: np.ndarray
    series: np.ndarray

    def to_dict(self) -> dict:
        return {"nu": self.nu, "uncertainty": self.uncertainty, "reliable": self.reliable}


def estimate_nu(frames: list[SelfSimilarFrame], use_stored: bool = True) -> NuEstimate:
    """``nu`` = ``d^3_y W(0, s)`` at the last frame; uncertainty = drift over the final unit of s.

    Flagged unreliable when the back-and-forth motion over that unit (total
    variation minus net drift) exceeds the net drift itself.
    """
    if len(frames) < 3:
        raise ValueError("estimate_nu needs at least 3 frames")
    s = np.array([f.s for f in frames])
    if s[-1] - s[0] < 1.0:
        raise ValueError("frames must span at least one unit of s")
    v = np.array([third_derivative_at_origin(f, use_stored) for f in frames])
    tail = s >= s[-1] - 1.0
    vt = v[tail]
    drift = float(abs(vt[-1] - vt[0]))
    wiggle = float(np.sum(np.abs(np.diff(vt)))) - drift
    reliable = bool(wiggle <= max(drift, 1e-3 * abs(v[-1])))
    return NuEstimate(float(v[-1]), drift, reliable, s, v)


# -- transport velocities -------------------------------------------------------------


def transport_velocities(frame: SelfSimilarFrame, mod: ModulationRecord, rates: ModulationRates):
    """``(V_W, V_Z)`` on the frame grid.

    ``V_W = 3y/2 + beta W + G_W`` and ``V_Z = 3y/2 + beta W / 3 + G_Z`` with
    ``G_W = e^{s/2} beta (kappa + Z/3 - xi_dot)``,
    ``G_Z = e^{s/2} beta (kappa/3 + Z - xi_dot)``, ``beta = 1 / (1 - tau_dot)``.
    """
    if rates is None:
        raise InsufficientHistoryError("transport velocities need differenced modulation rates")
    beta = rates.beta_tau
    eh = np.exp(0.5 * mod.s)
    GW = eh * beta * (mod.kappa + frame.Z / 3 - rates.xi_dot)
    GZ = eh * beta * (mod.kappa / 3 + frame.Z - rates.xi_dot)
    VW = 1.5 * frame.y + beta * frame.W + GW
    VZ = 1.5 * frame.y + beta * frame.W / 3 + GZ
    return VW, VZ


def forcing_terms(frame: SelfSimilarFrame, mod: ModulationRecord, rates: ModulationRates, beta_star: float = 0.0):
    """Right-hand sides ``(F_W, F_Z)`` of the self-similar transport equations.

    ``F_W = -beta e^{-s/2} (3/4 beta* B + kappa_dot)`` and
    ``F_Z = -3/4 beta* beta e^{-s} B``.
    """
    B = np.zeros_like(frame.y) if frame.B is None else frame.B
    beta = rates.beta_tau
    FW = -beta * np.exp(-0.5 * mod.s) * (0.75 * beta_star * B + rates.kappa_dot)
    FZ = -0.75 * beta_star * beta * np.exp(-mod.s) * B
    return FW, FZ
