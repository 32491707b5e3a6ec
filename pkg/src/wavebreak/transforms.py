"""Variable changes (zeta, vbar) -> (h, u) -> (sigma, u) -> (w, z), topography,
and discrete Sobolev seminorms on periodic grids."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import hermite

from .grid import Grid


class AdmissibilityError(ValueError):
    """Non-cavitation ``h > h_min`` is violated."""


class DomainError(ValueError):
    """Input outside the domain of a transform (vacuum, ``h <= 0``)."""


@dataclass(frozen=True)
class ModelParams:
    H: float = 1.0
    eps: float = 1.0
    beta_star: float = 0.0
    h_min: float = 0.1

    def __post_init__(self):
        if not self.H > self.h_min > 0:
            raise ValueError(f"need H > h_min > 0, got H={self.H}, h_min={self.h_min}")
        for name in ("eps", "beta_star"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    @property
    def amplitude(self) -> float:
        return max(self.eps, self.beta_star)


@dataclass
class PhysicalState:
    grid: Grid
    zeta: np.ndarray
    vbar: np.ndarray
    t: float = 0.0
    offset: float = 0.0  # physical x of the grid origin (co-moving frames)

    def __post_init__(self):
        self.zeta = np.asarray(self.zeta, dtype=float)
        self.vbar = np.asarray(self.vbar, dtype=float)
        if self.zeta.shape != (self.grid.n,) or self.vbar.shape != (self.grid.n,):
            raise ValueError("field lengths must match the grid")

    @property
    def x_phys(self) -> np.ndarray:
        return self.grid.x + self.offset


@dataclass
class RiemannState:
    grid: Grid
    w: np.ndarray
    z: np.ndarray
    t: float = 0.0
    offset: float = 0.0
    # compensated-summation remainders carried between time steps
    carry: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        self.z = np.asarray(self.z, dtype=float)
        if self.w.shape != (self.grid.n,) or self.z.shape != (self.grid.n,):
            raise ValueError("field lengths must match the grid")

    @property
    def x_phys(self) -> np.ndarray:
        return self.grid.x + self.offset

    def check_admissible(self):
        gap = self.w - self.z
        if not np.all(gap > 0):
            i = int(np.argmin(gap))
            raise DomainError(f"vacuum: w - z = {gap[i]:.3e} at node {i} (x={self.grid.x[i]:.6g})")


# -- topography --------------------------------------------------------------

TOPO_FAMILIES = ("flat", "gaussian", "sine", "tabulated")


@dataclass(frozen=True)
class Topography:
    """Bottom profile ``b(x)`` with analytic derivatives up to order 6.

    gaussian: ``A exp(-((x-c)/width)^2)``; sine: ``A sin((x-c)/width)``;
    tabulated: trigonometric interpolant of periodic samples ``table`` taken
    on ``[center, center + width)``.
    """

    family: str = "flat"
    amplitude: float = 0.0
    width: float = 1.0
    center: float = 0.0
    table: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.family not in TOPO_FAMILIES:
            raise ValueError(f"unknown topography family {self.family!r}")
        if not self.width > 0:
            raise ValueError("topography width must be positive")
        if self.family == "tabulated" and len(self.table) < 4:
            raise ValueError("tabulated topography needs at least 4 samples")

    @classmethod
    def from_config(cls, cfg: dict) -> "Topography":
        return cls(
            family=cfg.get("topo.family", "flat"),
            amplitude=float(cfg.get("topo.amplitude", 0.0)),
            width=float(cfg.get("topo.width", 1.0)),
            center=float(cfg.get("topo.center", 0.0)),
        )

    def __call__(self, x):
        return self.deriv(x, 0)

    def deriv(self, x, k: int = 0):
        if not 0 <= k <= 6:
            raise ValueError("topography derivatives are available for k = 0..6")
        x = np.asarray(x, dtype=float)
        A, s, c = self.amplitude, self.width, self.center
        if self.family == "flat" or A == 0.0:
            return np.zeros_like(x)
        u = (x - c) / s
        if self.family == "gaussian":
            coef = np.zeros(k + 1)
            coef[k] = 1.0
            return A * (-1) ** k * hermite.hermval(u, coef) * np.exp(-u * u) / s**k
        if self.family == "sine":
            return A * np.sin(u + k * np.pi / 2) / s**k
        vals = np.asarray(self.table, dtype=float)
        n = vals.size
        coef = np.fft.rfft(vals) / n
        m = np.arange(coef.size)
        if n % 2 == 0:
            coef[-1] *= 0.5  # split Nyquist so the interpolant stays real
        kw = 2 * np.pi * m / s
        phase = np.exp(1j * np.multiply.outer(x - c, kw))
        terms = coef * (1j * kw) ** k * phase
        weight = np.where(m == 0, 1.0, 2.0)
        return A * np.real(terms @ weight)


# -- variable changes --------------------------------------------------------


def to_depth(state: PhysicalState, topo: Topography, params: ModelParams):
    """``h = H + eps*zeta - beta*b``, ``u = eps*vbar``; enforces ``h > h_min``."""
    b = topo(state.x_phys)
    h = params.H + params.eps * state.zeta - params.beta_star * b
    u = params.eps * state.vbar
    if not np.all(h > params.h_min):
        i = int(np.argmin(h))
        raise AdmissibilityError(
            f"non-cavitation violated: h = {h[i]:.6g} <= h_min = {params.h_min} "
            f"at node {i} (x = {state.x_phys[i]:.6g})"
        )
    return h, u


def from_depth(h, u, grid: Grid, topo: Topography, params: ModelParams, t=0.0, offset=0.0):
    """Inverse of :func:`to_depth`; needs ``eps > 0``."""
    if params.eps <= 0:
        raise DomainError("eps = 0: physical variables cannot be recovered from (h, u)")
    b = topo(grid.x + offset)
    zeta = (np.asarray(h) - params.H + params.beta_star * b) / params.eps
    vbar = np.asarray(u) / params.eps
    return PhysicalState(grid, zeta, vbar, t, offset)


def to_riemann(h, u, grid: Grid | None = None, t: float = 0.0, offset: float = 0.0):
    """``sigma = 2 sqrt(h)``, ``w = 3/4 (u + sigma)``, ``z = 3/4 (u - sigma)``.

    Returns a :class:`RiemannState` when ``grid`` is given, else ``(w, z)``.
    """
    h = np.asarray(h, dtype=float)
    u = np.asarray(u, dtype=float)
    if not np.all(h > 0):
        raise DomainError("to_riemann needs h > 0 at every node")
    sigma = 2 * np.sqrt(h)
    w = 0.75 * (u + sigma)
    z = 0.75 * (u - sigma)
    if grid is None:
        return w, z
    return RiemannState(grid, w, z, t, offset)


def from_riemann(state_or_w, z=None):
    """Inverse of :func:`to_riemann`: ``u = 2/3 (w+z)``, ``h = sigma^2/4``."""
    if z is None:
        w, z = state_or_w.w, state_or_w.z
    else:
        w = np.asarray(state_or_w, dtype=float)
        z = np.asarray(z, dtype=float)
    gap = w - z
    if not np.all(gap > 0):
        raise DomainError("vacuum: w - z must be positive")
    u = (2 / 3) * (w + z)
    sigma = (2 / 3) * gap
    return sigma * sigma / 4, u


def physical_to_riemann(state: PhysicalState, topo: Topography, params: ModelParams) -> RiemannState:
    h, u = to_depth(state, topo, params)
    return to_riemann(h, u, state.grid, state.t, state.offset)


# -- Sobolev seminorms ---------------------------------------------------------


def sobolev_seminorm(f, order: int, grid: Grid) -> float:
    """Discrete homogeneous ``H^order`` seminorm on a uniform periodic grid.

    Spectral differentiation plus the trapezoid rule (Parseval), so the value
    is exact for band-limited fields.
    """
    if int(order) != order or not 0 <= order <= 6:
        raise ValueError("order must be an integer in 0..6")
    if not grid.uniform:
        raise ValueError("sobolev_seminorm needs a uniform periodic grid")
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.n,):
        raise ValueError("field length must match the grid")
    n = grid.n
    c = np.fft.rfft(f) / n
    k = 2 * np.pi * np.fft.rfftfreq(n, d=grid.length / n)
    weight = np.full(c.size, 2.0)
    weight[0] = 1.0
    if n % 2 == 0:
        weight[-1] = 1.0
    power = np.abs(c) ** 2 * weight
    if order > 0:
        power = power * k ** (2 * order)
    return float(np.sqrt(grid.length * power.sum()))


@dataclass
class ScalingReport:
    pairs: list[tuple[float, float]]
    seminorms: list[float]
    ratios: list[float | None]
    variation: float
    span_decades: float
    limit: float = 3.0

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.variation) and self.variation < self.limit)

    def to_dict(self) -> dict:
        return {
            "pairs": [list(p) for p in self.pairs],
            "seminorms": self.seminorms,
            "ratios": self.ratios,
            "variation": self.variation,
            "span_decades": self.span_decades,
            "limit": self.limit,
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def riemann_h5(zeta0, vbar0, grid: Grid, topo: Topography, params: ModelParams, order: int = 5) -> float:
    """``|| (w0 - mean, z0 - mean) ||_{H^order}`` for physical data ``(zeta0, vbar0)``."""
    h, u = to_depth(PhysicalState(grid, zeta0, vbar0), topo, params)
    w, z = to_riemann(h, u)
    sw = sobolev_seminorm(w - w.mean(), order, grid)
    sz = sobolev_seminorm(z - z.mean(), order, grid)
    return float(np.hypot(sw, sz))


def moser_scaling_check(zeta0, vbar0, topo: Topography, params_list, grid: Grid, limit: float = 3.0) -> ScalingReport:
    """Ratio of the ``H^5`` size of ``(w0, z0)`` to ``max(eps, beta*)`` over parameter pairs.

    Passes when that ratio varies by less than ``limit`` (max/min) across the
    pairs with ``max(eps, beta*) > 0``.
    """
    pairs, norms, ratios = [], [], []
    for p in params_list:
        nrm = riemann_h5(zeta0, vbar0, grid, topo, p)
        pairs.append((p.eps, p.beta_star))
        norms.append(nrm)
        ratios.append(nrm / p.amplitude if p.amplitude > 0 else None)
    good = [r for r in ratios if r is not None]
    amps = [p.amplitude for p in params_list if p.amplitude > 0]
    if good and min(good) > 0:
        variation = max(good) / min(good)
        span = float(np.log10(max(amps) / min(amps)))
    else:
        variation, span = float("nan"), 0.0
    return ScalingReport(pairs, norms, ratios, float(variation), span, limit)
