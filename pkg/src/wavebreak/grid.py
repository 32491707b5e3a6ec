"""Periodic 1D grids: uniform, or a static sinh-stretched map of a uniform one.

Every grid is a uniform grid in a computational coordinate ``q`` in
``[-pi, pi)`` mapped to physical ``x = X(q)`` in ``[-L/2, L/2)``.  Stencils act
in ``q``; physical derivatives divide by the Jacobian ``X'(q)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

# 5th-order upwind-biased first derivative (positive speed: stencil i-3..i+2)
_UP5 = np.array([-2.0, 15.0, -60.0, 20.0, 30.0, -3.0]) / 60.0
_UP5_OFFS = np.arange(-3, 3)
# 8th-order central first derivative
_C8 = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0.0, 4 / 5, -1 / 5, 4 / 105, -1 / 280])
_C8_OFFS = np.arange(-4, 5)


def _shift(f, k):
    """``out[i] = f[i + k]`` with periodic wrap."""
    return np.roll(f, -k)


@dataclass(frozen=True)
class Grid:
    n: int
    length: float
    mapping: str = "uniform"
    core: float = 0.0  # sinh map: x = core * sinh(k q)

    def __post_init__(self):
        if self.n < 16:
            raise ValueError("grid needs at least 16 nodes")
        if not self.length > 0:
            raise ValueError("grid length must be positive")
        if self.mapping not in ("uniform", "sinh"):
            raise ValueError(f"unknown mapping {self.mapping!r}")
        if self.mapping == "sinh" and not 0 < self.core < self.length / 2:
            raise ValueError("sinh mapping needs 0 < core < L/2")

    @property
    def dq(self) -> float:
        return 2 * np.pi / self.n

    @cached_property
    def q(self) -> np.ndarray:
        return -np.pi + self.dq * np.arange(self.n)

    @property
    def _k(self) -> float:
        return np.arcsinh(self.length / (2 * self.core)) / np.pi

    def x_of_q(self, q):
        if self.mapping == "uniform":
            return q * self.length / (2 * np.pi)
        return self.core * np.sinh(self._k * q)

    def q_of_x(self, x):
        if self.mapping == "uniform":
            return np.asarray(x) * 2 * np.pi / self.length
        return np.arcsinh(np.asarray(x) / self.core) / self._k

    def jac_of_q(self, q):
        if self.mapping == "uniform":
            return np.full_like(np.asarray(q, dtype=float), self.length / (2 * np.pi))
        k = self._k
        return self.core * k * np.cosh(k * q)

    @cached_property
    def x(self) -> np.ndarray:
        return self.x_of_q(self.q)

    @cached_property
    def jac(self) -> np.ndarray:
        return self.jac_of_q(self.q)

    @cached_property
    def dx_local(self) -> np.ndarray:
        return self.jac * self.dq

    @cached_property
    def _inv_h(self) -> np.ndarray:
        return 1.0 / (self.dq * self.jac)

    @property
    def dx(self) -> float:
        """Uniform spacing (smallest spacing on a mapped grid)."""
        return float(self.dx_local.min())

    @property
    def uniform(self) -> bool:
        return self.mapping == "uniform"

    def wrap(self, x):
        L = self.length
        return (np.asarray(x) + L / 2) % L - L / 2

    # -- differential operators -------------------------------------------

    def ddx_upwind(self, f, speed):
        """5th-order upwind-biased ``df/dx`` choosing the side by ``sign(speed)``."""
        n = self.n
        f = f - f[0]  # shift invariance; keeps rounding at the scale of the variation
        fp = np.concatenate((f[-4:], f, f[:4]))  # fp[i + 4] = f[i]
        plus = sum(c * fp[4 + o : 4 + o + n] for c, o in zip(_UP5, _UP5_OFFS))
        minus = sum(c * fp[4 - o : 4 - o + n] for c, o in zip(_UP5, _UP5_OFFS))
        d = np.where(speed >= 0, plus, -minus)
        return d * self._inv_h

    def ddx(self, f):
        """8th-order central ``df/dx``."""
        n = self.n
        f = f - f[0]
        fp = np.concatenate((f[-4:], f, f[:4]))
        d = sum(c * fp[4 + o : 4 + o + n] for c, o in zip(_C8, _C8_OFFS) if c != 0.0)
        return d * self._inv_h

    def derivatives(self, f, order: int) -> list[np.ndarray]:
        """``[f, f_x, ..., f_x^(order)]`` by repeated central differencing."""
        out = [np.asarray(f, dtype=float)]
        for _ in range(order):
            out.append(self.ddx(out[-1]))
        return out

    def integrate(self, f) -> float:
        """Periodic trapezoid rule in ``q``; spectral for data that vanish near the box edge."""
        return float(np.sum(f * self.jac) * self.dq)

    # -- interpolation ----------------------------------------------------

    def interp(self, f, xs, npts: int = 6):
        """Local Lagrange interpolation (degree ``npts-1``) in ``q`` at points ``xs``."""
        f = np.asarray(f)
        xs = self.wrap(np.asarray(xs, dtype=float))
        qs = self.q_of_x(xs)
        u = (qs + np.pi) / self.dq
        i0 = np.floor(u).astype(int)
        frac = u - i0
        lo = npts // 2 - 1
        offs = np.arange(-lo, npts - lo)
        # Lagrange basis on integer nodes offs, evaluated at frac
        out = np.zeros(np.shape(xs), dtype=np.result_type(f, float))
        for j, oj in enumerate(offs):
            lj = np.ones_like(frac)
            for m, om in enumerate(offs):
                if m != j:
                    lj = lj * (frac - om) / (oj - om)
            out = out + lj * f[(i0 + oj) % self.n]
        return out

    def argmin_subgrid(self, f, hint=None):
        """Subgrid location of ``min f`` by a 3-point parabola in ``q``.

        Ties between equal minima resolve toward ``hint`` (a physical x).
        """
        vals = np.asarray(f)
        m = vals.min()
        cand = np.flatnonzero(vals <= m + 1e-14 * max(1.0, abs(m)))
        if hint is not None and cand.size > 1:
            d = np.abs(self.wrap(self.x[cand] - hint))
            i = int(cand[np.argmin(d)])
        else:
            i = int(cand[0])
        fm, f0, fp = vals[(i - 1) % self.n], vals[i], vals[(i + 1) % self.n]
        denom = fm - 2 * f0 + fp
        shift = 0.5 * (fm - fp) / denom if denom > 0 else 0.0
        shift = float(np.clip(shift, -0.5, 0.5))
        return i, float(self.wrap(self.x_of_q(self.q[i] + shift * self.dq)))


def uniform_grid(n: int, length: float) -> Grid:
    return Grid(n, length)


def sinh_grid(n: int, length: float, core: float) -> Grid:
    return Grid(n, length, "sinh", core)
