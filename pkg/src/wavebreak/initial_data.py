"""Admissible self-similar seeds ``(W0, Z0)`` and their physical counterparts.

``W0 = Wbar * phi(y / far_scale)`` with a smooth cutoff ``phi`` that equals 1 on
``[-1/2, 1/2]``, so the perturbation ``W0 - Wbar`` vanishes identically near the
origin.  ``Z0`` is a wide ``sech^2`` bump of height ``M delta / 4``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import sympy as sp

from . import profile
from .grid import Grid
from .transforms import (
    AdmissibilityError,
    ModelParams,
    PhysicalState,
    RiemannState,
    Topography,
    from_riemann,
    to_depth,
)

MAX_DERIV = 5


class SeedConstructionError(ValueError):
    pass


@dataclass(frozen=True)
class SeedParams:
    M: float = 100.0
    delta: float = 0.01
    kappa0: float = 3.0

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if not self.M > np.e:
            raise ValueError(f"M must exceed e so that ell < 1, got {self.M}")
        if not self.kappa0 > 0:
            raise ValueError("kappa0 must be positive")

    @classmethod
    def for_depth(cls, M: float, delta: float, H: float = 1.0) -> "SeedParams":
        """Background ``w = 3 sqrt(H)`` corresponds to fluid at depth ``H``."""
        return cls(M, delta, 3.0 * np.sqrt(H))

    @property
    def s0(self) -> float:
        return -np.log(self.delta)

    @property
    def ell(self) -> float:
        return float(np.log(self.M) ** -2)

    @property
    def inner_width(self) -> float:
        """Physical width ``delta^(3/2)`` of one self-similar unit at ``t = -delta``."""
        return self.delta**1.5

    def to_dict(self) -> dict:
        return {"M": self.M, "delta": self.delta, "kappa0": self.kappa0, "s0": self.s0, "ell": self.ell}


# -- smooth cutoff -----------------------------------------------------------


@lru_cache(maxsize=1)
def _step_derivs():
    """Lambdified derivatives 0..5 of ``g(1-t) / (g(1-t) + g(t))``, ``g(t) = exp(-1/t)``."""
    t = sp.symbols("t")
    g = lambda a: sp.exp(-1 / a)  # noqa: E731
    expr = g(1 - t) / (g(1 - t) + g(t))
    return [sp.lambdify(t, sp.diff(expr, t, k), "numpy") for k in range(MAX_DERIV + 1)]


# outside this band the step is flat to double precision
_T_CLAMP = 2e-3


def cutoff(r, k: int = 0):
    """Even smooth cutoff (or its k-th derivative): 1 for ``|r| <= 1/2``, 0 for ``|r| >= 1``."""
    if not 0 <= k <= MAX_DERIV:
        raise ValueError(f"cutoff derivatives available for k = 0..{MAX_DERIV}")
    r = np.asarray(r, dtype=float)
    t = 2 * np.abs(r) - 1
    out = np.zeros_like(r)
    if k == 0:
        out[t <= _T_CLAMP] = 1.0
    band = (t > _T_CLAMP) & (t < 1 - _T_CLAMP)
    if band.any():
        tb = t[band]
        # d/dr = 2 sign(r) d/dt
        out[band] = _step_derivs()[k](tb) * (2 * np.sign(r[band])) ** k
    return out[()] if out.ndim == 0 else out


# -- seed profiles -----------------------------------------------------------


@dataclass(frozen=True)
class CutoffProfile:
    """``W0(y) = Wbar(y) phi(y / far_scale)`` with exact derivatives up to order 5."""

    far_scale: float

    def deriv(self, y, k: int = 0):
        y = np.asarray(y, dtype=float)
        F = self.far_scale
        r = y / F
        total = np.zeros_like(y)
        for j in range(k + 1):
            wbar = profile.eval_profile(y) if j == 0 else profile.eval_profile_deriv(y, j)
            coef = float(sp.binomial(k, j))
            total = total + coef * wbar * cutoff(r, k - j) / F ** (k - j)
        return total

    def __call__(self, y):
        return self.deriv(y, 0)


@lru_cache(maxsize=1)
def _sech2_derivs():
    u = sp.symbols("u")
    expr = sp.sech(u) ** 2
    return [sp.lambdify(u, sp.diff(expr, u, k), "numpy") for k in range(MAX_DERIV + 1)]


@dataclass(frozen=True)
class SechProfile:
    """``amplitude * sech(rate * y)^2``."""

    amplitude: float
    rate: float

    def deriv(self, y, k: int = 0):
        y = np.asarray(y, dtype=float)
        u = np.clip(self.rate * y, -350, 350)
        return self.amplitude * self.rate**k * np.asarray(_sech2_derivs()[k](u), dtype=float)

    def __call__(self, y):
        return self.deriv(y, 0)


def _far_slope(params: SeedParams, far_scale: float, n: int = 20001) -> float:
    """``max |d_y W0|`` over ``|y| >= delta^(-3/2)/2`` (W0 is odd, so ``y > 0`` suffices)."""
    y_lo = 0.5 * params.delta**-1.5
    y = np.geomspace(y_lo, max(far_scale, y_lo) * 1.01, n)
    return float(np.max(np.abs(CutoffProfile(far_scale).deriv(y, 1))))


def min_far_scale(params: SeedParams, growth: float = 1.1) -> float:
    """Smallest ``far_scale`` on a geometric ladder from ``delta^(-3/2)`` meeting the far slope bound."""
    F = params.delta**-1.5
    for _ in range(400):
        if _far_slope(params, F) <= params.delta:
            return float(F)
        F *= growth
    raise SeedConstructionError("no admissible far_scale found")


def build_W0(params: SeedParams, far_scale: float | None = None) -> CutoffProfile:
    if far_scale is None:
        far_scale = min_far_scale(params)
    if far_scale < params.delta**-1.5:
        raise SeedConstructionError(
            f"far_scale {far_scale:.4g} is below the cutoff length delta^(-3/2) = {params.delta ** -1.5:.4g}"
        )
    slope = _far_slope(params, far_scale)
    if slope > params.delta:
        raise SeedConstructionError(
            f"far-field slope {slope:.3e} exceeds delta = {params.delta}; increase far_scale"
        )
    return CutoffProfile(float(far_scale))


def build_Z0(params: SeedParams) -> SechProfile:
    return SechProfile(0.25 * params.M * params.delta, params.delta**1.5)


# -- seeds on a region-adapted grid -----------------------------------------


def seed_grid(params: SeedParams, y_max: float, n_near: int = 401, per_decade: int = 200) -> np.ndarray:
    """Symmetric grid: uniform on ``|y| <= ell``, log-spaced beyond, up to ``y_max``."""
    ell = params.ell
    near = np.linspace(0, ell, n_near)
    decades = np.log10(y_max / ell)
    outer = np.geomspace(ell, y_max, max(2, int(np.ceil(decades * per_decade)) + 1))[1:]
    pos = np.concatenate([near, outer])
    return np.concatenate([-pos[:0:-1], pos])


@dataclass
class SelfSimilarSeed:
    y: np.ndarray
    W0: np.ndarray
    Z0: np.ndarray
    params: SeedParams
    w_profile: CutoffProfile
    z_profile: SechProfile
    # exact derivatives on the grid, order 1..4; keyed by order
    dW0: dict = field(default_factory=dict)
    dZ0: dict = field(default_factory=dict)

    def to_columns(self) -> np.ndarray:
        return np.column_stack([self.y, self.W0, self.Z0])

    def header(self) -> dict:
        return {"params": self.params.to_dict(), "far_scale": self.w_profile.far_scale, "n": int(self.y.size)}

    def save(self, path):
        """Two-column-style text file ``y W0 Z0`` with a JSON header line."""
        with open(path, "w") as fh:
            fh.write("# " + json.dumps(self.header()) + "\n")
            fh.write("y,W0,Z0\n")
            np.savetxt(fh, self.to_columns(), delimiter=",", fmt="%.17g")


def build_seed(params: SeedParams, far_scale: float | None = None, y_max: float | None = None) -> SelfSimilarSeed:
    wp = build_W0(params, far_scale)
    zp = build_Z0(params)
    if y_max is None:
        y_max = 1.5 * wp.far_scale
    y = seed_grid(params, y_max)
    dW = {k: wp.deriv(y, k) for k in range(1, 5)}
    dZ = {k: zp.deriv(y, k) for k in range(1, 5)}
    return SelfSimilarSeed(y, wp(y), zp(y), params, wp, zp, dW, dZ)


def perturb_seed(seed: SelfSimilarSeed, scale: float, rng: np.random.Generator) -> SelfSimilarSeed:
    """Add a small smooth random perturbation that vanishes to fifth order at ``y = 0``.

    Used for robustness spot checks; ``verify_seed`` stays the judge of admissibility.
    """
    p = seed.params
    width = 0.25 * p.delta**-1.5
    amp = scale * p.delta ** (1 / 12) * rng.standard_normal(2)
    y = sp.symbols("y")
    u = y / width
    expr = (amp[0] * u**5 + amp[1] * u**6) * sp.exp(-u * u)
    fns = [sp.lambdify(y, sp.diff(expr, y, k), "numpy") for k in range(5)]
    add = [np.asarray(f(seed.y), dtype=float) * np.ones_like(seed.y) for f in fns]
    dW = {k: seed.dW0[k] + add[k] for k in range(1, 5)}
    return SelfSimilarSeed(seed.y, seed.W0 + add[0], seed.Z0.copy(), p, seed.w_profile, seed.z_profile, dW, dict(seed.dZ0))


# -- verification -------------------------------------------------------------


@dataclass
class Check:
    name: str
    region: str
    worst_lhs: float
    bound: float
    worst_y: float

    @property
    def margin(self) -> float:
        """Relative margin ``(bound - lhs) / bound``; negative means violated."""
        return (self.bound - self.worst_lhs) / self.bound if self.bound > 0 else -np.inf

    @property
    def passed(self) -> bool:
        return self.worst_lhs <= self.bound

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "region": self.region,
            "worst_lhs": self.worst_lhs,
            "bound": self.bound,
            "worst_y": self.worst_y,
            "margin": self.margin,
            "passed": self.passed,
        }


def _check(name, region, y, lhs, bound) -> Check:
    """Pointwise ``lhs <= bound``; ``bound`` may be an array.  Reports the worst ratio."""
    if y.size == 0:
        return Check(name, region, 0.0, 1.0, float("nan"))
    bound = np.broadcast_to(np.asarray(bound, dtype=float), lhs.shape)
    ratio = lhs / bound
    i = int(np.argmax(ratio))
    return Check(name, region, float(lhs[i]), float(bound[i]), float(y[i]))


@dataclass
class SeedReport:
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [c.to_dict() for c in self.checks]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def verify_seed(seed: SelfSimilarSeed) -> SeedReport:
    """Check every initial condition on the seed grid, region by region."""
    p = seed.params
    y, W = seed.y, seed.W0
    ell, d12 = p.ell, p.delta ** (1 / 12)
    y_mid = 0.5 * p.delta**-1.5
    ay = np.abs(y)
    jb = np.sqrt(1 + y * y)
    near = ay <= ell
    mid = (ay >= ell) & (ay <= y_mid)
    far = ay >= y_mid
    beyond_ell = ay >= ell

    Wbar = profile.eval_profile(y)
    pert = [W - Wbar] + [seed.dW0[k] - profile.eval_profile_deriv(y, k) for k in range(1, 5)]
    dW = seed.dW0

    checks = []
    # constraints at the origin
    i0 = int(np.argmin(ay))
    checks.append(_check("W0(0)=0", "origin", y[[i0]], np.abs(W[[i0]]), 1e-14))
    checks.append(_check("dW0(0)=-1", "origin", y[[i0]], np.abs(dW[1][[i0]] + 1), 1e-12))
    checks.append(_check("d2W0(0)=0", "origin", y[[i0]], np.abs(dW[2][[i0]]), 1e-12))
    checks.append(_check("min dW0 = dW0(0)", "global", y, -dW[1], 1.0 + 1e-12))

    checks.append(_check("|Wt0|", "near", y[near], np.abs(pert[0][near]), 0.5 * d12 * ell**4))
    checks.append(_check("|Wt0|", "middle", y[mid], np.abs(pert[0][mid]), d12 * jb[mid] ** (1 / 3)))
    checks.append(_check("|dWt0|", "near", y[near], np.abs(pert[1][near]), 0.5 * d12 * ell**3))
    checks.append(_check("|dWt0|", "middle", y[mid], np.abs(pert[1][mid]), d12 * jb[mid] ** (-2 / 3)))
    checks.append(_check("|dW0|", "far", y[far], np.abs(dW[1][far]), p.delta))
    checks.append(_check("|d2Wt0|", "near", y[near], np.abs(pert[2][near]), 0.5 * d12 * ell**2))
    checks.append(_check("|d2W0|", "beyond ell", y[beyond_ell], np.abs(dW[2][beyond_ell]), p.M ** 0.1))
    checks.append(_check("|d3Wt0|", "near", y[near], np.abs(pert[3][near]), 0.5 * d12 * ell))
    checks.append(_check("|d4Wt0|", "near", y[near], np.abs(pert[4][near]), 0.25 * d12))
    checks.append(_check("|d4W0|", "global", y, np.abs(dW[4]), 0.5 * p.M))
    sup_w = np.abs(W + p.delta**-0.5 * p.kappa0)
    checks.append(_check("|W0 + kappa0 e^(s0/2)|", "global", y, sup_w, 0.5 * p.M * p.delta**-0.5))
    checks.append(_check("|d3Wt0(0)|", "origin", y[[i0]], np.abs(pert[3][[i0]]), 0.25 * p.delta ** (1 / 9)))

    checks.append(_check("|Z0|", "global", y, np.abs(seed.Z0), 0.5 * p.M * p.delta))
    checks.append(_check("|dZ0|", "global", y, np.abs(seed.dZ0[1]), 0.5 * p.M * p.delta ** (5 / 6)))
    checks.append(_check("|d4Z0|", "global", y, np.abs(seed.dZ0[4]), 0.5 * p.M * p.delta ** (2 / 3)))
    return SeedReport(checks)


# -- physical data ------------------------------------------------------------


def seed_to_riemann(seed: SelfSimilarSeed, grid: Grid, offset: float = 0.0) -> RiemannState:
    """``w0 = delta^(1/2) W0(x / delta^(3/2)) + kappa0``, ``z0 = Z0(x / delta^(3/2))`` at ``t = -delta``."""
    p = seed.params
    x = grid.x + offset
    y = x / p.inner_width
    w = np.sqrt(p.delta) * seed.w_profile(y) + p.kappa0
    z = seed.z_profile(y)
    state = RiemannState(grid, w, z, -p.delta, offset)
    try:
        state.check_admissible()
    except ValueError as exc:
        raise SeedConstructionError(str(exc)) from exc
    return state


def seed_to_physical(seed: SelfSimilarSeed, topo: Topography, params: ModelParams, grid: Grid, offset: float = 0.0) -> PhysicalState:
    """Physical ``(zeta0, vbar0)`` at ``t = -delta``; enforces non-cavitation."""
    if params.eps <= 0:
        raise SeedConstructionError("eps must be positive to express the seed in physical variables")
    rs = seed_to_riemann(seed, grid, offset)
    h, u = from_riemann(rs)
    b = topo(rs.x_phys)
    zeta = (h - params.H + params.beta_star * b) / params.eps
    vbar = u / params.eps
    state = PhysicalState(grid, zeta, vbar, rs.t, offset)
    try:
        to_depth(state, topo, params)
    except AdmissibilityError as exc:
        raise SeedConstructionError(str(exc)) from exc
    return state
