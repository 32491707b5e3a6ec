"""Checks of a completed run: blowup time and place, rate, cusp exponent,
self-similar convergence, bootstrap inequalities, Lagrangian trajectories and
lifespan scaling.

Everything that depends on resolution is restricted to the resolvable window
``tau - t >= (20 dx)^(2/3)``, i.e. the self-similar unit length
``(tau - t)^(3/2)`` spans at least 20 local cells.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from . import profile
from .initial_data import SeedParams
from .renormalization import (
    ModulationRates,
    ModulationRecord,
    SelfSimilarFrame,
    estimate_nu,
    forcing_terms,
    modulation_rates,
    resample_frame,
    transport_velocities,
)
from .solver import Trajectory

WINDOW_CELLS = 20.0


class NoBreakingError(ValueError):
    pass


class InsufficientRangeError(ValueError):
    pass


# -- resolvable window -----------------------------------------------------------


def window_floor(dx: float) -> float:
    """Smallest resolvable ``tau - t`` for local spacing ``dx``."""
    return (WINDOW_CELLS * dx) ** (2 / 3)


def record_dx(rec: ModulationRecord) -> float:
    return rec.dy_local * (rec.tau - rec.t) ** 1.5


def in_window(rec: ModulationRecord) -> bool:
    return (rec.tau - rec.t) >= window_floor(record_dx(rec))


def window_mask(records) -> np.ndarray:
    return np.array([in_window(r) for r in records])


# -- blowup time and location ------------------------------------------------------


@dataclass
class BlowupEstimate:
    T: float
    x: float
    T_uncertainty: float
    x_uncertainty: float
    n_used: int
    m_range: tuple[float, float]

    def to_dict(self) -> dict:
        return asdict(self)


def _fit_zero(t, m):
    b, a = np.polyfit(t, m, 1)
    if b >= 0:
        raise NoBreakingError("tau - t is not decreasing; no breaking detected")
    return -a / b


def estimate_blowup(records: list[ModulationRecord], decades: float = 1.0) -> BlowupEstimate:
    """Extrapolate ``tau - t`` linearly to zero over the last resolved ``decades``."""
    recs = [r for r in records if in_window(r)]
    if len(recs) < 5:
        raise InsufficientRangeError(f"need at least 5 records in the resolvable window, have {len(recs)}")
    t = np.array([r.t for r in recs])
    m = np.array([r.tau - r.t for r in recs])
    xi = np.array([r.xi for r in recs])
    if m[-1] >= m[0]:
        raise NoBreakingError("tau - t does not decrease over the resolvable window")
    sel = m <= m.min() * 10**decades
    if sel.sum() < 5:
        sel = np.zeros_like(sel)
        sel[-5:] = True
    ts, ms, xs = t[sel], m[sel], xi[sel]
    T = _fit_zero(ts, ms)
    half = len(ts) // 2
    spread = 0.0
    if half >= 2 and len(ts) - half >= 2:
        spread = max(abs(_fit_zero(ts[:half], ms[:half]) - T), abs(_fit_zero(ts[half:], ms[half:]) - T))
    v, c = np.polyfit(ts, xs, 1)
    x_star = xs[-1] + v * (T - ts[-1])
    x_unc = abs(v) * spread + float(np.max(np.abs(xs - (c + v * ts))))
    return BlowupEstimate(float(T), float(x_star), float(spread), float(x_unc), int(sel.sum()), (float(ms.min()), float(ms.max())))


# -- rate ------------------------------------------------------------------------------


@dataclass
class RateReport:
    t: np.ndarray
    product: np.ndarray
    lo: float = 0.5
    hi: float = 2.0
    max_jump: float = 0.05

    @property
    def passed(self) -> bool:
        return bool(self.product.size and np.all((self.product >= self.lo) & (self.product <= self.hi)))

    def within(self, lo: float, hi: float) -> bool:
        return bool(self.product.size and np.all((self.product >= lo) & (self.product <= hi)))

    @property
    def continuous(self) -> bool:
        return bool(np.all(np.abs(np.diff(self.product)) <= self.max_jump))

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "continuous": self.continuous,
            "min": float(self.product.min()) if self.product.size else None,
            "max": float(self.product.max()) if self.product.size else None,
            "n": int(self.product.size),
        }


def max_slope(state) -> float:
    """``max |w_x|`` over the grid nodes (central differences)."""
    return float(np.max(np.abs(state.grid.ddx(state.w))))


def rate_check(traj: Trajectory, T_est: float, records: list[ModulationRecord]) -> RateReport:
    """``(T_est - t) max|w_x|`` at every snapshot inside the resolvable window."""
    mask = window_mask(records)
    snaps = [s for s, ok in zip(traj.snapshots, mask) if ok]
    t = np.array([s.t for s in snaps])
    prod = np.array([(T_est - s.t) * max_slope(s) for s in snaps])
    return RateReport(t, prod)


# -- cusp ----------------------------------------------------------------------------------


@dataclass
class CuspFit:
    exponent: float
    ci_low: float
    ci_high: float
    n: int
    inner: float
    outer: float

    @property
    def decades(self) -> float:
        return float(np.log10(self.outer / self.inner))

    def to_dict(self) -> dict:
        return asdict(self) | {"decades": self.decades}


def cusp_pairs(x, w, x_star: float, w_star: float, inner: float, outer: float):
    """``(|x - x*|, |w - w*|)`` for nodes with ``inner <= |x - x*| <= outer``."""
    r = np.abs(np.asarray(x) - x_star)
    sel = (r >= inner) & (r <= outer)
    return r[sel], np.abs(np.asarray(w)[sel] - w_star)


def cusp_fit(x, w, x_star: float, w_star: float, inner: float, outer: float, min_decades: float = 1.5, level: float = 0.95) -> CuspFit:
    """Least-squares slope of ``log|w - w*|`` against ``log|x - x*|`` on the window."""
    if not outer > inner > 0:
        raise InsufficientRangeError("cusp window is empty")
    if np.log10(outer / inner) < min_decades - 1e-12:
        raise InsufficientRangeError(
            f"cusp window spans {np.log10(outer / inner):.2f} decades, need {min_decades}"
        )
    r, dw = cusp_pairs(x, w, x_star, w_star, inner, outer)
    keep = dw > 0
    r, dw = r[keep], dw[keep]
    if r.size < 4:
        raise InsufficientRangeError("too few points in the cusp window")
    res = stats.linregress(np.log(r), np.log(dw))
    half = stats.t.ppf(0.5 + level / 2, r.size - 2) * res.stderr
    return CuspFit(float(res.slope), float(res.slope - half), float(res.slope + half), int(r.size), float(inner), float(outer))


def cusp_fit_state(state, center: float, w_center: float, min_decades: float = 1.5) -> CuspFit:
    """Cusp fit of a snapshot around ``center`` over ``20 dx <= |x - center| <= min(1/2, L/8)``."""
    g = state.grid
    loc = float(g.wrap(center - state.offset))
    dx = float(g.jac_of_q(g.q_of_x(loc)) * g.dq)
    return cusp_fit(g.x, state.w, loc, w_center, WINDOW_CELLS * dx, min(0.5, g.length / 8), min_decades)


# -- convergence to the profile ---------------------------------------------------------------


@dataclass
class ConvergenceReport:
    s: np.ndarray
    distance: np.ndarray
    nu: float
    threshold: float
    y_max: float
    trend: float = np.nan
    decreasing: bool = False

    @property
    def final(self) -> float:
        return float(self.distance[-1])

    @property
    def passed(self) -> bool:
        return bool(self.decreasing and self.final < self.threshold)

    def to_dict(self) -> dict:
        return {
            "nu": self.nu,
            "final": self.final,
            "threshold": self.threshold,
            "y_max": self.y_max,
            "trend_final_unit": self.trend,
            "decreasing": self.decreasing,
            "passed": self.passed,
        }


def profile_distance(frame: SelfSimilarFrame, nu: float, y_max: float = 1e3) -> float:
    sel = np.abs(frame.y) <= y_max
    return float(np.max(np.abs(frame.W[sel] - profile.eval_rescaled(frame.y[sel], nu))))


def convergence_check(frames: list[SelfSimilarFrame], nu: float, y_max: float = 1e3, threshold: float = 0.1, tail: float = 1.0) -> ConvergenceReport:
    """``sup_{|y| <= y_max} |W - Wbar_nu|`` per frame.

    Decreasing means: over frames with ``s >= s_last - tail`` the least-squares
    slope in ``s`` is negative and the last value is below the first.
    """
    s = np.array([f.s for f in frames])
    d = np.array([profile_distance(f, nu, y_max) for f in frames])
    rep = ConvergenceReport(s, d, float(nu), threshold, y_max)
    sel = s >= s[-1] - tail
    if sel.sum() >= 2:
        rep.trend = float(np.polyfit(s[sel], d[sel], 1)[0])
        rep.decreasing = bool(rep.trend < 0 and d[sel][-1] < d[sel][0])
    elif np.all(d == 0):
        rep.trend, rep.decreasing = 0.0, True
    if np.all(d == 0):
        rep.decreasing = True
    return rep


# -- bootstrap inequalities ------------------------------------------------------------------


@dataclass
class BootstrapEntry:
    ineq: str
    region: str
    worst_lhs: float
    bound: float
    y: float
    skipped: bool = False

    @property
    def margin(self) -> float:
        if self.skipped:
            return np.nan
        return (self.bound - self.worst_lhs) / self.bound

    @property
    def passed(self) -> bool:
        return self.skipped or self.worst_lhs <= self.bound

    def to_dict(self) -> dict:
        return asdict(self) | {"margin": self.margin, "passed": self.passed}


@dataclass
class BootstrapReport:
    s: float
    entries: list[BootstrapEntry] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def worst(self) -> dict[tuple[str, str], float]:
        return {(e.ineq, e.region): e.margin for e in self.entries}

    def to_dict(self) -> dict:
        return {"s": self.s, "passed": self.passed, "entries": [e.to_dict() for e in self.entries]}


def _entry(ineq, region, y, lhs, bound, relax) -> BootstrapEntry:
    if y.size == 0:
        return BootstrapEntry(ineq, region, np.nan, np.nan, np.nan, skipped=True)
    bound = np.broadcast_to(np.asarray(bound, dtype=float) * relax, lhs.shape)
    ratio = lhs / bound
    i = int(np.argmax(ratio))
    return BootstrapEntry(ineq, region, float(lhs[i]), float(bound[i]), float(y[i]))


def _scalar(ineq, region, lhs, bound, relax) -> BootstrapEntry:
    return BootstrapEntry(ineq, region, float(abs(lhs)), float(bound * relax), 0.0)


def bootstrap_check(frame: SelfSimilarFrame, mod: ModulationRecord, params: SeedParams, rates: ModulationRates | None = None, relax: float = 1.0) -> BootstrapReport:
    """Evaluate the bootstrap inequalities on one frame.

    Regions: near ``|y| <= ell``, middle ``ell <= |y| <= e^{3s/2}/2``, far
    beyond (only as far as the frame reaches).  Modulation bounds on ``tau_dot``
    and ``xi_dot`` need ``rates``; without them those entries are skipped.
    ``relax`` multiplies every right-hand side.
    """
    s, y = frame.s, frame.y
    ell, M, dl = params.ell, params.M, params.delta
    ay = np.abs(y)
    jb = np.sqrt(1 + y * y)
    half = 0.5 * np.exp(1.5 * s)
    near, mid, far = ay <= ell, (ay >= ell) & (ay <= half), ay >= half
    beyond = ay >= ell
    Wt = frame.W_tilde()
    dWt = {k: frame.dW_tilde(k) for k in range(1, 5)}
    d12 = dl ** (1 / 12)
    E = []
    E.append(_entry("W~ zeroth", "near", y[near], np.abs(Wt[near]), d12 * ell**4, relax))
    E.append(_entry("W~ zeroth", "middle", y[mid], np.abs(Wt[mid]), dl ** (1 / 15) * jb[mid] ** (1 / 3), relax))
    E.append(_entry("W~ first", "near", y[near], np.abs(dWt[1][near]), d12 * ell**3, relax))
    E.append(_entry("W~ first", "middle", y[mid], np.abs(dWt[1][mid]), dl ** (1 / 18) * jb[mid] ** (-2 / 3), relax))
    E.append(_entry("W first", "far", y[far], np.abs(frame.dW[1][far]), 2 * np.exp(-s), relax))
    E.append(_entry("W~ second", "near", y[near], np.abs(dWt[2][near]), d12 * ell**2, relax))
    E.append(_entry("W second", "beyond ell", y[beyond], np.abs(frame.dW[2][beyond]), M**0.2, relax))
    E.append(_entry("W~ third", "near", y[near], np.abs(dWt[3][near]), d12 * ell, relax))
    E.append(_entry("W~ fourth", "near", y[near], np.abs(dWt[4][near]), d12, relax))
    eh = np.exp(0.5 * s)
    E.append(_entry("W sup", "global", y, np.abs(frame.W + eh * mod.kappa), M * eh, relax))
    E.append(_entry("W fourth sup", "global", y, np.abs(frame.dW[4]), M, relax))
    i0 = frame.origin
    E.append(_scalar("W~ third at 0", "origin", dWt[3][i0], dl ** (1 / 9), relax))
    E.append(_entry("Z sup", "global", y, np.abs(frame.Z), M * dl, relax))
    E.append(_entry("Z first sup", "global", y, np.abs(frame.dZ[1]), M * np.exp(-5 * s / 6), relax))
    E.append(_entry("Z fourth sup", "global", y, np.abs(frame.dZ[4]), M * np.exp(-2 * s / 3), relax))
    E.append(_scalar("tau", "modulation", mod.tau, 2 * M * dl ** (4 / 3), relax))
    E.append(_scalar("xi", "modulation", mod.xi, 2 * M * dl, relax))
    if rates is not None:
        E.append(_scalar("tau_dot", "modulation", rates.tau_dot, 2 * M * np.exp(-s / 3), relax))
        E.append(_scalar("xi_dot", "modulation", rates.xi_dot, 2 * M, relax))
    else:
        E.append(BootstrapEntry("tau_dot", "modulation", np.nan, np.nan, np.nan, skipped=True))
        E.append(BootstrapEntry("xi_dot", "modulation", np.nan, np.nan, np.nan, skipped=True))

    # consequences: sup |W_y| within [0.99, 1.01], attained at the origin
    sup = np.abs(frame.dW[1])
    j = int(np.argmax(sup))
    E.append(BootstrapEntry("sup |W_y| <= 1.01", "global", float(sup[j]), 1.01 * relax, float(y[j])))
    E.append(BootstrapEntry("sup |W_y| >= 0.99", "global", 0.99 / relax, float(sup[j]), float(y[j])))
    # unique maximiser at y = 0, up to one local cell
    tol_y = max(frame.record.dy_local if frame.record is not None else 0.0, float(np.min(ay[ay > 0])))
    E.append(BootstrapEntry("argmax |W_y| at 0", "global", abs(float(y[j])), tol_y * relax, float(y[j])))
    return BootstrapReport(float(s), E)


@dataclass
class BootstrapSummary:
    reports: list[BootstrapReport]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    def worst_margins(self) -> dict[str, dict]:
        out: dict[str, dict] = {}
        for r in self.reports:
            for e in r.entries:
                key = f"{e.ineq} [{e.region}]"
                cur = out.get(key)
                if e.skipped:
                    out.setdefault(key, {"margin": None, "s": None, "y": None, "skipped_frames": 0})
                    out[key]["skipped_frames"] = out[key].get("skipped_frames", 0) + 1
                    continue
                if cur is None or cur["margin"] is None or e.margin < cur["margin"]:
                    skipped = cur.get("skipped_frames", 0) if cur else 0
                    out[key] = {"margin": e.margin, "s": r.s, "y": e.y, "lhs": e.worst_lhs, "bound": e.bound, "skipped_frames": skipped}
        return out

    def to_dict(self) -> dict:
        return {"passed": self.passed, "n_frames": len(self.reports), "worst": self.worst_margins()}


def bootstrap_suite(frames, records, params: SeedParams, rates=None, relax: float = 1.0) -> BootstrapSummary:
    if rates is None:
        rates = [None] * len(frames)
    return BootstrapSummary([bootstrap_check(f, r, params, q, relax) for f, r, q in zip(frames, records, rates)])


# -- Lagrangian trajectories -------------------------------------------------------------------


@dataclass
class LagrangianPath:
    y0: float
    s: np.ndarray
    phi: np.ndarray
    truncated: bool
    upper_ok: bool
    lower_ok: bool | None
    integral: float
    integral_ok: bool | None
    upper_margin: float
    lower_margin: float | None

    def to_dict(self) -> dict:
        return {
            "y0": self.y0,
            "s_end": float(self.s[-1]),
            "phi_end": float(self.phi[-1]),
            "truncated": self.truncated,
            "upper_ok": self.upper_ok,
            "lower_ok": self.lower_ok,
            "integral": self.integral,
            "integral_ok": self.integral_ok,
            "upper_margin": self.upper_margin,
            "lower_margin": self.lower_margin,
        }


class VelocityField:
    """``V(y, s)``: linear in ``y`` within each frame, linear in ``s`` between frames."""

    def __init__(self, s, ys, vs, family: str = "W"):
        self.family = family
        self.s = np.asarray(s, dtype=float)
        self.ys = ys
        self.vs = vs
        self.y_lim = np.array([min(abs(y[0]), abs(y[-1])) for y in ys])

    @classmethod
    def from_frames(cls, frames, records, family: str = "W", rates=None):
        if rates is None:
            rates = modulation_rates(records)
        ys, vs = [], []
        for f, r, q in zip(frames, records, rates):
            vw, vz = transport_velocities(f, r, q)
            ys.append(f.y)
            vs.append(vw if family == "W" else vz)
        return cls([f.s for f in frames], ys, vs, family)

    def __call__(self, y: float, s: float) -> tuple[float, bool]:
        k = int(np.clip(np.searchsorted(self.s, s) - 1, 0, len(self.s) - 2))
        a = (s - self.s[k]) / (self.s[k + 1] - self.s[k])
        out = abs(y) > min(self.y_lim[k], self.y_lim[k + 1])
        v0 = np.interp(y, self.ys[k], self.vs[k])
        v1 = np.interp(y, self.ys[k + 1], self.vs[k + 1])
        return float((1 - a) * v0 + a * v1), bool(out)


def trace_trajectory(field: VelocityField, y0: float, params: SeedParams, substeps: int = 4, s0: float | None = None) -> LagrangianPath:
    """RK4 integration of ``dPhi/ds = V(Phi, s)`` from ``field.s[0]`` to ``field.s[-1]``.

    Checks the growth envelope ``|Phi| <= (|y0| + 8 M delta^{-1/2}) e^{3(s-s0)/2}``,
    the escape bound ``|Phi| >= |y0| e^{(s-s0)/5}`` and
    ``int <Phi>^{-2/3} ds <= 10 log(1/ell)`` (the last two for the W family
    and ``|y0| >= ell``).
    """
    ss = field.s
    if s0 is None:
        s0 = float(ss[0])
    grid = [float(ss[0])]
    for a, b in zip(ss[:-1], ss[1:]):
        grid.extend(np.linspace(a, b, substeps + 1)[1:].tolist())
    grid = np.array(grid)
    phi = np.empty_like(grid)
    phi[0] = y0
    truncated = False
    n_done = grid.size
    for k in range(grid.size - 1):
        s, h = grid[k], grid[k + 1] - grid[k]
        y = phi[k]
        k1, o1 = field(y, s)
        k2, o2 = field(y + 0.5 * h * k1, s + 0.5 * h)
        k3, o3 = field(y + 0.5 * h * k2, s + 0.5 * h)
        k4, o4 = field(y + h * k3, s + h)
        if o1 or o2 or o3 or o4:
            truncated = True
            n_done = k + 1
            break
        phi[k + 1] = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    grid, phi = grid[:n_done], phi[:n_done]
    ds = grid - s0
    upper = (abs(y0) + 8 * params.M * params.delta**-0.5) * np.exp(1.5 * ds)
    upper_ok = bool(np.all(np.abs(phi) <= upper))
    upper_margin = float(np.min((upper - np.abs(phi)) / upper))
    integrand = (1 + phi**2) ** (-1 / 3)
    integral = float(np.trapezoid(integrand, grid)) if grid.size > 1 else 0.0
    lower_ok = integral_ok = lower_margin = None
    if abs(y0) >= params.ell and field.family == "W":
        lower = abs(y0) * np.exp(ds / 5)
        lower_ok = bool(np.all(np.abs(phi) >= lower))
        lower_margin = float(np.min((np.abs(phi) - lower) / lower))
        integral_ok = bool(integral <= 10 * np.log(1 / params.ell))
    return LagrangianPath(float(y0), grid, phi, truncated, upper_ok, lower_ok, integral, integral_ok, upper_margin, lower_margin)


def sample_y0(params: SeedParams, y_max: float, n: int = 20) -> np.ndarray:
    """``n`` starting points: the origin, a few inside ``|y| < ell``, the rest log-spaced to ``y_max`` (alternating sign)."""
    n_near = 3
    near = np.linspace(0, params.ell, n_near + 1)[:-1]
    far = np.geomspace(params.ell, y_max, n - n_near)
    sign = np.where(np.arange(far.size) % 2 == 0, 1.0, -1.0)
    return np.concatenate([near, far * sign])


# -- residual of the self-similar W equation ----------------------------------------------


def transport_residual(frames, records, beta_star: float = 0.0, y_max: float = 10.0) -> np.ndarray:
    """``sup_{|y|<=y_max} |(d_s - 1/2) W + V_W W_y - F_W|`` at interior frames.

    ``d_s W`` by three-point differences between neighbouring frames resampled
    onto the middle frame's grid.
    """
    rates = modulation_rates(records)
    out = []
    for k in range(1, len(frames) - 1):
        fm, f0, fp = frames[k - 1], frames[k], frames[k + 1]
        sel = np.abs(f0.y) <= y_max
        y = f0.y[sel]
        wm = resample_frame(fm, y).W
        wp = resample_frame(fp, y).W
        h1, h2 = f0.s - fm.s, fp.s - f0.s
        W0 = f0.W[sel]
        dsW = (-h2 / (h1 * (h1 + h2))) * wm + ((h2 - h1) / (h1 * h2)) * W0 + (h1 / (h2 * (h1 + h2))) * wp
        vw, _ = transport_velocities(f0, records[k], rates[k])
        fw, _ = forcing_terms(f0, records[k], rates[k], beta_star)
        res = dsW - 0.5 * W0 + vw[sel] * f0.dW[1][sel] - fw[sel]
        out.append(float(np.max(np.abs(res))))
    return np.array(out)


# -- lifespan ----------------------------------------------------------------------------------------


@dataclass
class LifespanFit:
    slope: float
    intercept: float
    n: int
    span_decades: float
    lo: float = -1.1
    hi: float = -0.9

    @property
    def passed(self) -> bool:
        return bool(self.lo <= self.slope <= self.hi)

    def to_dict(self) -> dict:
        return asdict(self) | {"passed": self.passed}


def lifespan_regression(points, min_points: int = 5, min_decades: float = 1.5) -> LifespanFit:
    """Slope of ``log T*`` against ``log max(eps, beta*)`` from ``(eps, beta*, T*)`` triples."""
    pts = [(max(e, b), T) for e, b, T in points if max(e, b) > 0 and T is not None and np.isfinite(T) and T > 0]
    if len(pts) < min_points:
        raise InsufficientRangeError(f"need at least {min_points} valid sweep points, have {len(pts)}")
    a = np.array([p[0] for p in pts])
    T = np.array([p[1] for p in pts])
    span = float(np.log10(a.max() / a.min()))
    if span < min_decades - 1e-12:
        raise InsufficientRangeError(f"amplitudes span {span:.2f} decades, need {min_decades}")
    slope, intercept = np.polyfit(np.log(a), np.log(T), 1)
    return LifespanFit(float(slope), float(intercept), len(pts), span)


def breaking_time_from_history(t, min_slope, m_floor: float = 0.0, decades: float = 1.0) -> float:
    """Breaking time from a per-step slope history, ``m = -1/min slope``.

    Linear extrapolation of ``m(t)`` to zero over the last ``decades`` of ``m``
    among steps with ``m >= m_floor``.
    """
    t = np.asarray(t)
    sl = np.asarray(min_slope)
    ok = sl < 0
    t, m = t[ok], -1.0 / sl[ok]
    keep = m >= m_floor
    t, m = t[keep], m[keep]
    if m.size < 5:
        raise InsufficientRangeError("not enough steepening history to extrapolate")
    sel = m <= m.min() * 10**decades
    if sel.sum() < 5:
        sel[-5:] = True
    return float(_fit_zero(t[sel], m[sel]))


def amplitude_floor(dx: float, amplitude: float, cells: float = WINDOW_CELLS) -> float:
    """Smallest resolvable ``m`` for a front of height ``amplitude``: width ``amplitude * m >= cells * dx``."""
    return cells * dx / amplitude


# -- verdict -----------------------------------------------------------------------------------


@dataclass
class Verdict:
    items: dict[str, dict]

    @property
    def passed(self) -> bool:
        return all(v.get("passed", False) for v in self.items.values())

    def to_dict(self) -> dict:
        return {"passed": self.passed, "items": self.items}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=_json_default)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))

