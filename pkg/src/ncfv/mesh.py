"""Uniform grids, cell-average fields with ghost cells, and time steps."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .core import as_state
from .errors import DomainError, ZeroWaveSpeed

__all__ = [
    "Grid1D",
    "CellField",
    "DtBudget",
    "init_from_riemann",
    "init_from_function",
    "cell_average",
    "compute_dt",
    "apply_ghost",
    "GHOST",
]

GHOST = 2


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid of ``m`` cells of width ``dx`` starting at ``x_left``."""

    x_left: float
    dx: float
    m: int

    def __post_init__(self):
        if not self.dx > 0:
            raise ValueError("dx must be positive")
        if self.m < 1:
            raise ValueError("need at least one cell")

    @classmethod
    def from_bounds(cls, a, b, m):
        return cls(float(a), (float(b) - float(a)) / m, int(m))

    @property
    def x_right(self):
        return self.x_left + self.m * self.dx

    @property
    def edges(self):
        return self.x_left + np.arange(self.m + 1) * self.dx

    @property
    def centers(self):
        return self.x_left + (np.arange(self.m) + 0.5) * self.dx

    def interface(self, j):
        """Position of ``x_{j-1/2}`` (left edge of cell ``j``)."""
        return self.x_left + j * self.dx


@dataclass(frozen=True)
class CellField:
    """Cell averages with ``g`` ghost layers per side.

    ``data`` has shape ``(m + 2 g, N)``; the physical cells are
    ``data[g:-g]``.
    """

    grid: Grid1D
    data: np.ndarray
    time: float = 0.0
    ghost_policy: str = "transmissive"
    g: int = GHOST

    def __post_init__(self):
        if self.ghost_policy not in ("transmissive", "periodic"):
            raise ValueError(f"unknown ghost policy {self.ghost_policy!r}")
        if self.data.shape[0] != self.grid.m + 2 * self.g:
            raise ValueError("data does not match the grid and ghost width")

    @property
    def averages(self):
        return self.data[self.g:-self.g]

    @property
    def n_vars(self):
        return self.data.shape[1]

    @classmethod
    def from_averages(cls, grid, averages, time=0.0, ghost_policy="transmissive", g=GHOST):
        averages = np.atleast_2d(as_state(averages))
        data = np.empty((grid.m + 2 * g, averages.shape[1]))
        data[g:-g] = averages
        return apply_ghost(cls(grid, data, float(time), ghost_policy, g))

    def with_averages(self, averages, time):
        return CellField.from_averages(self.grid, averages, time, self.ghost_policy, self.g)


@dataclass(frozen=True)
class DtBudget:
    dt_c: float
    dt_r: float

    @property
    def dt(self):
        return min(self.dt_c, self.dt_r)


def apply_ghost(field):
    """Refresh ghost cells according to the field's policy."""
    data = field.data.copy()
    g = field.g
    if field.ghost_policy == "periodic":
        data[:g] = data[-2 * g:-g]
        data[-g:] = data[g:2 * g]
    else:
        data[:g] = data[g]
        data[-g:] = data[-g - 1]
    return replace(field, data=data)


def init_from_riemann(grid, uL, uR, x0, system=None, ghost_policy="transmissive"):
    """Cell averages of the step ``uL`` for ``x < x0``, ``uR`` otherwise."""
    uL = as_state(uL)
    uR = as_state(uR)
    if system is not None:
        system.check_domain(uL, "left state")
        system.check_domain(uR, "right state")
    if not grid.x_left <= x0 <= grid.x_right:
        raise DomainError("x0 outside the grid")
    j = int(np.floor((x0 - grid.x_left) / grid.dx))
    U = np.empty((grid.m, uL.size))
    U[:max(j, 0)] = uL
    U[max(j, 0):] = uR
    if 0 <= j < grid.m:
        d = (x0 - grid.interface(j)) / grid.dx
        if d > 0:
            U[j] = d * uL + (1.0 - d) * uR
    return CellField.from_averages(grid, U, 0.0, ghost_policy)


def init_from_function(grid, f: Callable, system=None, ghost_policy="transmissive", nquad=1):
    """Cell values of ``f``, vectorised over positions.

    ``nquad=1`` samples the centres; larger values use Gauss-Legendre
    averages with ``nquad`` nodes per cell.
    """
    if nquad == 1:
        U = np.asarray(f(grid.centers), dtype=float)
    else:
        U = cell_average(f, grid, nquad)
    if U.ndim == 1:
        U = np.broadcast_to(U, (grid.m, U.size)).copy()
    if system is not None and not np.all(system.in_domain(U)):
        bad = np.flatnonzero(~np.asarray(system.in_domain(U)))
        raise DomainError(f"initial data outside the admissible set at cells {bad[:5]}")
    return CellField.from_averages(grid, U, 0.0, ghost_policy)


def cell_average(f, grid, nquad=4):
    """Gauss-Legendre cell averages of ``f`` (``f(x) -> (..., N)``)."""
    nodes, weights = np.polynomial.legendre.leggauss(nquad)
    x = grid.centers[:, None] + 0.5 * grid.dx * nodes[None, :]
    vals = np.asarray(f(x), dtype=float)
    if vals.ndim == 2:
        vals = vals[..., None]
    return 0.5 * np.einsum("q,mqn->mn", weights, vals)


def compute_dt(field, system, marks=None, cfl=0.5, dt_max=np.inf):
    """CFL step combined with the limit that keeps in-cell jumps inside their cells.

    Raises
    ------
    ZeroWaveSpeed
        When every eigenvalue vanishes and ``dt_max`` is infinite.
    """
    smax = system.max_speed(field.averages)
    if smax > 0:
        dt_c = cfl * field.grid.dx / smax
    elif np.isfinite(dt_max):
        dt_c = np.inf
    else:
        raise ZeroWaveSpeed("all wave speeds vanish; provide dt_max")
    dt_r = marks.dt_limit(field.grid.dx) if marks is not None else np.inf
    return DtBudget(min(dt_c, dt_max), dt_r)
