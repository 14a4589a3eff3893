"""Fully discrete update and time loop."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .core import path_integral, roe_fluctuations_batch
from .errors import ConfigError, DomainError, MaxStepsExceeded, SolverFailure
from .mesh import CellField, apply_ghost, compute_dt
from .recon import MarkSet, exact_strategy, mark_cells, minmod_slope, resolve_marks

__all__ = [
    "SchemeConfig",
    "StepReport",
    "SMOOTH",
    "MARKED",
    "NEIGHBOR",
    "interface_states",
    "assemble_cell_term",
    "step",
    "run",
]

SMOOTH, MARKED, NEIGHBOR = 0, 1, 2


@dataclass(frozen=True)
class SchemeConfig:
    """Scheme variant.

    Parameters
    ----------
    order : {1, 2}
        Plain first order or MUSCL-Hancock.
    disrec : bool
        Enable in-cell discontinuous reconstruction.
    base : {'roe', 'godunov'}
        Interface fluctuations.
    strategy : {'roe', 'exact'}
        How marked cells pick their jump.
    cfl : float
        In ``(0, 1)``.
    alpha : float
        Limiter parameter in ``[1, 2)``.
    dt_max : float
        Upper bound on every step.
    max_steps : int
        Guard against stalled runs.
    min_dt_ratio : float
        A reconstruction whose sides do not match the neighbouring traces,
        and which would cut the step below this fraction of the CFL step,
        is dropped for that step and the cell is updated by the base
        scheme.  ``0`` disables the floor.
    """

    order: int = 1
    disrec: bool = False
    base: str = "roe"
    strategy: str = "roe"
    cfl: float = 0.5
    alpha: float = 1.0
    dt_max: float = np.inf
    max_steps: int = 2_000_000
    min_dt_ratio: float = 0.2

    def __post_init__(self):
        problems = []
        if self.order not in (1, 2):
            problems.append(f"order must be 1 or 2, got {self.order!r}")
        if self.base not in ("roe", "godunov"):
            problems.append(f"base must be 'roe' or 'godunov', got {self.base!r}")
        if self.strategy not in ("roe", "exact"):
            problems.append(f"strategy must be 'roe' or 'exact', got {self.strategy!r}")
        if not 0.0 < self.cfl < 1.0:
            problems.append(f"cfl must lie in (0, 1), got {self.cfl!r}")
        if not 1.0 <= self.alpha < 2.0:
            problems.append(f"alpha must lie in [1, 2), got {self.alpha!r}")
        if not 0.0 <= self.min_dt_ratio < 1.0:
            problems.append(f"min_dt_ratio must lie in [0, 1), got {self.min_dt_ratio!r}")
        if not self.dt_max > 0:
            problems.append("dt_max must be positive")
        if problems:
            raise ConfigError("; ".join(problems), problems)

    @property
    def name(self):
        tag = "noDisRec"
        if self.disrec:
            tag = "ExactDisRec" if self.strategy == "exact" else "DisRec"
        return f"O{self.order}_{tag}"

    @classmethod
    def from_name(cls, name, **kw):
        """Build from labels such as ``'O2_DisRec'`` or ``'O1_ExactDisRec'``."""
        order = int(name[1])
        tag = name.split("_", 1)[1]
        disrec = tag != "noDisRec"
        if tag == "ExactDisRec":
            kw["strategy"] = "exact"
        return cls(order=order, disrec=disrec, **kw)


@dataclass
class StepReport:
    dt: float
    dt_c: float
    dt_r: float
    marks: MarkSet
    categories: np.ndarray
    fallbacks: int = 0

    @property
    def n_marked(self):
        return len(self.marks)

    @property
    def shifts(self):
        return [e for e in self.marks.events if e[0] == "shift"]


def _side_states(field, prev_marks, use_prev):
    g, m = field.g, field.grid.m
    U = field.data
    left = U[g - 1:g - 1 + m].copy()
    right = U[g + 1:g + 1 + m].copy()
    if use_prev and prev_marks is not None:
        periodic = field.ghost_policy == "periodic"
        for j, rec in prev_marks.recs.items():
            for k, arr, st in ((j + 1, left, rec.right_state), (j - 1, right, rec.left_state)):
                if periodic:
                    k %= m
                if 0 <= k < m:
                    arr[k] = st
    return left, right


def _ext_flags(field, marks):
    """Marked flags over the full data array (physical cells plus ghosts)."""
    g, m = field.g, field.grid.m
    flags = np.zeros(m + 2 * g, dtype=bool)
    for j in marks.recs:
        flags[g + j] = True
    if field.ghost_policy == "periodic":
        flags[:g] = flags[m:m + g]
        flags[m + g:] = flags[g:2 * g]
    return flags


def _rec_at(field, marks, k):
    """Reconstruction owning data index ``k`` (ghosts mirror in periodic mode)."""
    g, m = field.g, field.grid.m
    j = k - g
    if field.ghost_policy == "periodic":
        j %= m
    return marks.recs.get(j)


def _still(system, tol=1e-12):
    """Predicate: traces ``a | b`` form a stationary jump.

    By the Roe property the path integral vanishes exactly when the jump
    lies in the kernel of the Roe matrix, and then both fluctuations do.
    """
    closed = getattr(system.path, "closed_form", None)

    def compatible(a, b):
        cf = closed(system, a, b) if closed is not None else None
        if cf is None:
            cf = path_integral(system.path, system, a, b)
        return float(np.abs(cf).max()) <= tol * max(1.0, float(np.abs(b - a).max()))
    return compatible


def _isolated(field, marks, j, tol=1e-10):
    """True when the jump in cell ``j`` sees its own side states across both
    interfaces, i.e. it is an isolated discontinuity in constant data."""
    rec = marks.recs[j]
    g, m = field.g, field.grid.m
    periodic = field.ghost_policy == "periodic"
    for k, mine, side in ((j - 1, rec.left_state, "right"), (j + 1, rec.right_state, "left")):
        kk = k % m if periodic else k
        other = marks.recs.get(kk) if 0 <= kk < m else None
        if other is not None:
            trace = other.right_state if side == "right" else other.left_state
        else:
            trace = field.data[g + k]
        if np.max(np.abs(trace - mine) - tol * np.abs(mine)) > tol:
            return False
    return True


def interface_states(field, marks, system, scheme, dt):
    """Half-time interface traces and per-cell data.

    Returns
    -------
    left_if, right_if : ndarray, shape (m + 1, N)
        States on each side of ``x_{j-1/2}``, ``j = 0..m``.
    cats : ndarray, shape (m + 2,)
        Category of cells ``-1..m``.
    u_mid, slope : ndarray, shape (m + 2, N)
    fallbacks : int
        Cells whose predictor left the admissible set.
    """
    g, m, dx = field.g, field.grid.m, field.grid.dx
    U = field.data
    flags = _ext_flags(field, marks)
    ks = np.arange(g - 1, g + m + 1)
    marked = flags[ks]
    near = flags[ks - 1] | flags[ks + 1]
    cats = np.where(marked, MARKED, np.where(near, NEIGHBOR, SMOOTH))
    uc = U[ks]
    slope = np.zeros_like(uc)
    fallbacks = 0
    if scheme.order == 2:
        slope = minmod_slope(U[ks - 1], uc, U[ks + 1], scheme.alpha, dx)
        slope[cats != SMOOTH] = 0.0
    A = system.matrix(uc)
    u_mid = uc - 0.5 * dt * np.einsum("kij,kj->ki", A, slope)
    lf = u_mid - 0.5 * dx * slope
    rf = u_mid + 0.5 * dx * slope
    if scheme.order == 2:
        bad = ~(system.in_domain(u_mid) & system.in_domain(lf) & system.in_domain(rf))
        if np.any(bad):
            fallbacks = int(np.count_nonzero(bad[1:-1]))
            slope[bad] = 0.0
            u_mid[bad] = uc[bad]
            lf[bad] = uc[bad]
            rf[bad] = uc[bad]
    for i in np.flatnonzero(marked):
        rec = _rec_at(field, marks, ks[i])
        lf[i] = rec.left_state
        rf[i] = rec.right_state
    return rf[:-1], lf[1:], cats, u_mid, slope, fallbacks


def assemble_cell_term(category, dx=None, system=None, u_mid=None, slope=None, rec=None):
    """Cell contribution ``D_j`` for one cell."""
    if category == MARKED:
        return rec.cell_term()
    if category == NEIGHBOR:
        return np.zeros_like(np.asarray(u_mid if u_mid is not None else rec.uL, float))
    return dx * system.matrix(u_mid) @ slope


def _fluctuations(system, scheme, a, b):
    if scheme.base == "godunov":
        return system.godunov_batch(a, b)
    return roe_fluctuations_batch(system, a, b)


def step(field: CellField, scheme: SchemeConfig, system, prev_marks=None, dt_cap=np.inf):
    """Advance one time step.

    Parameters
    ----------
    field : CellField
    scheme : SchemeConfig
    system : SystemModel
    prev_marks : MarkSet, optional
        Reconstructions of the previous step; the exact strategy marks
        cells from their side states.
    dt_cap : float
        Additional bound on the step (end time, snapshots).

    Returns
    -------
    CellField, StepReport
    """
    field = apply_ghost(field)
    g, m, dx = field.g, field.grid.m, field.grid.dx
    Uc = field.averages
    periodic = field.ghost_policy == "periodic"

    marks = MarkSet()
    if scheme.disrec:
        exact = scheme.strategy == "exact"
        left, right = _side_states(field, prev_marks, exact)
        cand = mark_cells(left, right, system.marker)
        batch = None
        if exact:
            strat = lambda a, b, c: exact_strategy(system, a, b, c)
        else:
            strat = system.strategy
            batch = getattr(system, "strategy_batch", None)
        arrived = prev_marks.binding if prev_marks is not None else ()
        marks = resolve_marks(Uc, left, right, cand, strat, system.conserved, periodic,
                              system.in_domain, arrived, _still(system), batch)
        if marks.recs and scheme.min_dt_ratio > 0:
            floor = scheme.min_dt_ratio * compute_dt(field, system, None, scheme.cfl).dt
            slow = [j for j, r in marks.recs.items()
                    if r.dt_limit(dx) < floor and not _isolated(field, marks, j)]
            for j in slow:
                del marks.recs[j]
                marks.events.append(("stall", j))

    budget = compute_dt(field, system, marks, scheme.cfl,
                        min(scheme.dt_max, dt_cap))
    dt = budget.dt
    if not (np.isfinite(dt) and dt > 0):
        raise SolverFailure(f"invalid time step {dt!r} at t={field.time:.6g}")
    if marks.recs and budget.dt_r <= budget.dt_c:
        marks.binding = frozenset(j for j, r in marks.recs.items() if r.dt_limit(dx) <= dt)
    a, b, cats, u_mid, slope, fallbacks = interface_states(field, marks, system, scheme, dt)
    dm, dp = _fluctuations(system, scheme, a, b)

    Dj = np.zeros_like(Uc)
    inner = cats[1:-1]
    smooth = inner == SMOOTH
    if scheme.order == 2 and np.any(smooth):
        um, sl = u_mid[1:-1][smooth], slope[1:-1][smooth]
        Dj[smooth] = dx * np.einsum("kij,kj->ki", system.matrix(um), sl)
    for j, rec in marks.recs.items():
        Dj[j] = rec.cell_term()

    new = Uc - dt / dx * (dm[1:] + dp[:-1] + Dj)
    ok = system.in_domain(new)
    if not np.all(ok):
        bad = np.flatnonzero(~ok)
        raise DomainError(f"update left the admissible set at t={field.time + dt:.6g}, "
                          f"cells {bad[:5].tolist()}: {new[bad[:3]].tolist()}")
    report = StepReport(dt, budget.dt_c, budget.dt_r, marks, inner.copy(), fallbacks)
    return field.with_averages(new, field.time + dt), report


def run(field: CellField, scheme: SchemeConfig, system, t_end, snapshot_times=(),
        callback: Optional[Callable] = None):
    """Integrate to ``t_end``.

    Steps are shortened to land exactly on every snapshot time and on
    ``t_end``.  ``callback(field, report)`` is called after every step.

    Returns
    -------
    list of (float, CellField)
        Snapshots in increasing time order; the last one is at ``t_end``.
    """
    t0 = field.time
    if t_end < t0:
        raise ValueError("t_end precedes the field time")
    targets = sorted({float(t) for t in snapshot_times if t0 <= t <= t_end} | {float(t_end)})
    out = []
    prev = None
    steps = 0
    for target in targets:
        while field.time < target:
            remaining = target - field.time
            field, rep = step(field, scheme, system, prev, dt_cap=remaining)
            if rep.dt >= remaining:
                field = replace(field, time=target)
            prev = rep.marks
            steps += 1
            if callback is not None:
                callback(field, rep)
            if steps >= scheme.max_steps and field.time < t_end:
                raise MaxStepsExceeded(f"{steps} steps without reaching t={t_end}")
        out.append((target, field))
    return out
