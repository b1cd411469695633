"""Uniform truncated age grid, discrete densities, and their norms.

Densities are stored as cell averages on a uniform grid over ``[0, x_max]``,
so the total mass ``sum(values) * dx`` is the exact discrete invariant that
the transport scheme conserves.  The flat transport distance is the integral
of the absolute CDF difference, which upper-bounds the truncated-distance
optimal transport cost and is the majorant used by every inequality test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import MassMismatch


@dataclass(frozen=True)
class Grid:
    """Uniform cells on [0, x_max]; cell centers at (i + 1/2) * dx."""

    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 16:
            raise ValueError("grid needs at least 16 cells")
        if not self.x_max > 0:
            raise ValueError("x_max must be positive")

    @cached_property
    def dx(self) -> float:
        return self.x_max / self.n

    @cached_property
    def centers(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) * self.dx

    @cached_property
    def edges(self) -> np.ndarray:
        return np.arange(self.n + 1) * self.dx

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.x_max, self.n * factor)

    def with_same_spacing(self, span: float) -> "Grid":
        """Grid reaching at least ``span`` with this grid's spacing."""
        n = max(int(math.ceil(span / self.dx)), 16)
        return Grid(n * self.dx, n)

    def supports_tail_tolerance(self, a0: float, tol: float) -> bool:
        return self.x_max >= min_x_max_for_tail(a0, tol)


def min_x_max_for_tail(a0: float, tol: float) -> float:
    """Domain size putting the exponential steady-state tail below ``tol``.

    Rule of thumb with a 4x safety factor on the tail-decay length ``2/a0``.
    """
    if not (a0 > 0 and 0 < tol < 1):
        raise ValueError("need a0 > 0 and tol in (0, 1)")
    return 4.0 * (2.0 / a0) * math.log(1.0 / tol)


@dataclass
class DensityState:
    """Cell-averaged density on a grid; signed values allowed for perturbations."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n,):
            raise ValueError("values length must match the grid")

    def copy(self) -> "DensityState":
        return DensityState(self.values.copy(), self.grid)


def mass(f: DensityState) -> float:
    """Total mass ``sum_i f_i * dx``."""
    return float(f.values.sum() * f.grid.dx)


def l1_norm(f: DensityState, delta: float = 0.0) -> float:
    """L1 norm, optionally weighted by ``exp(-delta * x)``."""
    if delta == 0.0:
        return float(np.abs(f.values).sum() * f.grid.dx)
    w = np.exp(-delta * f.grid.centers)
    return float(np.dot(np.abs(f.values), w) * f.grid.dx)


def cdf(f: DensityState) -> np.ndarray:
    """Cumulative mass at the right cell edges."""
    return np.cumsum(f.values) * f.grid.dx


def w1_flat(f: DensityState, g: DensityState) -> float:
    """Flat 1-D transport distance: integral of the absolute CDF difference.

    Defined for equal-mass states; upper-bounds the transport distance built
    on the truncated ground metric, so it is only ever used on the majorant
    side of inequality tests.
    """
    if f.grid != g.grid:
        raise ValueError("states must share a grid")
    if abs(mass(f) - mass(g)) > 1e-8:
        raise MassMismatch("flat distance needs equal-mass states")
    diff = np.cumsum(f.values - g.values) * f.grid.dx
    pts = np.abs(np.concatenate(([0.0], diff)))
    return float(np.trapz(pts, dx=f.grid.dx))


def truncation_bound(model, grid: Grid) -> float:
    """Mass of the steady-state envelope beyond the truncation edge.

    Uses the explicit envelope ``C * exp(-a0 x / 2)`` with
    ``C = a1 * exp(a0 x_half / 2)``, integrated from ``x_max`` to infinity.
    """
    a0 = model.a0
    c = model.a1 * math.exp(0.5 * a0 * model.x_half())
    return c * (2.0 / a0) * math.exp(-0.5 * a0 * grid.x_max)


def density_to_csv(f: DensityState, path, value_column: str = "value") -> None:
    """Write ``x,<value_column>`` rows at cell centers."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"x,{value_column}\n")
        for x, v in zip(f.grid.centers, f.values):
            fh.write(f"{x:.17g},{v:.17g}\n")
