"""Reconstruction machinery: limited slopes, the half-step predictor,
cell marking and in-cell discontinuous reconstructions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .core import Shock, as_state
from .errors import DegenerateJump, SingularSystem, SolverFailure

__all__ = [
    "minmod",
    "minmod_slope",
    "Predictor",
    "muscl_predictor",
    "Outcome",
    "DisRec",
    "DoubleDisRec",
    "DoubleSpec",
    "Build",
    "MarkSet",
    "disrec_from_states",
    "build_disrec",
    "build_double_disrec",
    "mark_cells",
    "exact_strategy",
    "resolve_marks",
]

D_SNAP = 1e-12
D_LEAD = 1e-6
FACE_TOL = 1e-12
ARRIVE_TOL = 1e-2


def minmod(*args):
    """Componentwise minmod: smallest magnitude if all signs agree, else 0."""
    a = np.stack(np.broadcast_arrays(*args))
    pos = np.all(a > 0, axis=0)
    neg = np.all(a < 0, axis=0)
    return np.where(pos, a.min(axis=0), np.where(neg, a.max(axis=0), 0.0))


def minmod_slope(u_minus, u0, u_plus, alpha=1.0, dx=1.0):
    """Limited slope from three consecutive cell averages.

    Parameters
    ----------
    u_minus, u0, u_plus : array_like
        Averages of cells ``j-1``, ``j``, ``j+1``.
    alpha : float
        Limiter parameter in ``[1, 2)``.
    dx : float
        Cell width.
    """
    u_minus, u0, u_plus = (as_state(v) for v in (u_minus, u0, u_plus))
    return minmod(alpha * (u_plus - u0) / dx,
                  (u_plus - u_minus) / (2.0 * dx),
                  alpha * (u0 - u_minus) / dx)


@dataclass(frozen=True)
class Predictor:
    """Half-time values of the MUSCL-Hancock polynomial."""

    u_mid: np.ndarray
    left: np.ndarray
    right: np.ndarray


def muscl_predictor(u_j, slope, system, dt, dx):
    """Taylor predictor ``u_j - dt/2 A(u_j) slope`` and its interface traces."""
    u_j = as_state(u_j)
    slope = as_state(slope)
    A = system.matrix(u_j)
    u_mid = u_j - 0.5 * dt * np.einsum("...ij,...j->...i", A, slope)
    half = 0.5 * dx * slope
    return Predictor(u_mid, u_mid - half, u_mid + half)


# --------------------------------------------------------------------------
# discontinuous reconstructions
# --------------------------------------------------------------------------

class Outcome(enum.Enum):
    ACCEPT = "accept"
    SHIFT_RIGHT = "shift_right"
    SHIFT_LEFT = "shift_left"
    REJECT = "reject"


@dataclass(frozen=True)
class DisRec:
    """Single in-cell jump at ``x_{j-1/2} + d dx`` moving with ``sigma``."""

    d: float
    sigma: float
    uL: np.ndarray
    uR: np.ndarray

    @property
    def left_state(self):
        return self.uL

    @property
    def right_state(self):
        return self.uR

    def cell_term(self):
        return self.sigma * (self.uR - self.uL)

    def dt_limit(self, dx):
        return _dt_limit(self.d, self.sigma, dx)

    @property
    def edge(self):
        """Interface the jump sits on (``'left'``/``'right'``) or None."""
        if self.d == 0.0:
            return "left"
        if self.d == 1.0:
            return "right"
        return None

    def spec(self):
        return (self.sigma, self.uL, self.uR)


@dataclass(frozen=True)
class DoubleDisRec:
    """Two in-cell jumps ``uL | uMid | uR`` at ``d1 <= d2``."""

    d1: float
    d2: float
    sigma1: float
    sigma2: float
    uL: np.ndarray
    uMid: np.ndarray
    uR: np.ndarray

    @property
    def left_state(self):
        return self.uL

    @property
    def right_state(self):
        return self.uR

    def cell_term(self):
        return self.sigma1 * (self.uMid - self.uL) + self.sigma2 * (self.uR - self.uMid)

    def dt_limit(self, dx):
        return min(_dt_limit(self.d1, self.sigma1, dx), _dt_limit(self.d2, self.sigma2, dx))

    @property
    def edge(self):
        if self.d1 == 0.0:
            return "left"
        if self.d2 == 1.0:
            return "right"
        return None

    def spec(self):
        return DoubleSpec(self.sigma1, self.sigma2, self.uL, self.uMid, self.uR)


@dataclass(frozen=True)
class DoubleSpec:
    sigma1: float
    sigma2: float
    uL: np.ndarray
    uMid: np.ndarray
    uR: np.ndarray


Recon = Union[DisRec, DoubleDisRec]


@dataclass(frozen=True)
class Build:
    outcome: Outcome
    rec: Optional[Recon] = None
    reason: str = ""


def _close(a, b, tol):
    return bool(np.max(np.abs(a - b) - tol * np.abs(b)) <= tol)


def _dt_limit(d, sigma, dx):
    if sigma > 0:
        return (1.0 - d) * dx / sigma
    if sigma < 0:
        return d * dx / -sigma
    return np.inf


def _snap(d, sigma=0.0, arrive_tol=0.0):
    """Snap ``d`` onto an interface.

    The window is ``D_SNAP`` behind the jump and ``max(D_LEAD, arrive_tol)``
    on the side it is moving towards, so a jump a hair away from the
    interface it is heading for does not force a vanishing step.
    """
    lead = max(D_LEAD, arrive_tol)
    lo = lead if sigma < 0 else D_SNAP
    hi = lead if sigma > 0 else D_SNAP
    if abs(d) <= lo:
        return 0.0
    if abs(d - 1.0) <= hi:
        return 1.0
    return float(d)


def disrec_from_states(u_j, sigma, uL, uR, conserved, arrive_tol=0.0):
    """Place a jump ``uL | uR`` in a cell with average ``u_j``.

    ``d`` matches the conserved functional:
    ``c(d uL + (1 - d) uR) = c(u_j)``.  ``arrive_tol`` is the snapping
    window towards the interface the jump is heading for.
    """
    uL, uR, u_j = as_state(uL), as_state(uR), as_state(u_j)
    cL, cR, cj = uL @ conserved, uR @ conserved, u_j @ conserved
    if cL == cR:
        return Build(Outcome.REJECT, None, "degenerate jump")
    return _classify((cR - cj) / (cR - cL), sigma, uL, uR, arrive_tol)


def _classify(d, sigma, uL, uR, arrive_tol=0.0):
    d = _snap(d, sigma, arrive_tol)
    rec = DisRec(d, float(sigma), uL, uR)
    if d < 0.0 or d > 1.0:
        return Build(Outcome.REJECT, rec, "d outside [0, 1]")
    if d == 1.0 and sigma > 0:
        return Build(Outcome.SHIFT_RIGHT, rec)
    if d == 0.0 and sigma < 0:
        return Build(Outcome.SHIFT_LEFT, rec)
    return Build(Outcome.ACCEPT, rec)


def build_disrec(u_prev, u_j, u_next, strategy, conserved):
    """Single-jump reconstruction with ``(sigma, uL, uR) = strategy(u_prev, u_next)``.

    Raises
    ------
    DegenerateJump
        When the conserved functional takes the same value on both sides.
    """
    sigma, uL, uR = strategy(u_prev, u_next)
    b = disrec_from_states(u_j, sigma, uL, uR, np.asarray(conserved, float))
    if b.reason == "degenerate jump":
        raise DegenerateJump("conserved functional equal on both sides of the jump")
    return b


def build_double_disrec(uL, uMid, uR, u_j, sigma1, sigma2, arrive_tol=0.0):
    """Two-jump reconstruction matching every component of ``u_j``.

    Solves ``d1 uL + (d2 - d1) uMid + (1 - d2) uR = u_j``.

    Raises
    ------
    SingularSystem
        When the two jumps are collinear.
    """
    uL, uMid, uR, u_j = (as_state(v) for v in (uL, uMid, uR, u_j))
    M = np.column_stack([uL - uMid, uMid - uR])
    if M.shape[0] != 2 or abs(np.linalg.det(M)) <= 1e-14 * np.abs(M).max() ** 2:
        raise SingularSystem("two-jump reconstruction needs two independent jumps")
    d1, d2 = np.linalg.solve(M, u_j - uR)
    d1, d2 = _snap(d1, sigma1, arrive_tol), _snap(d2, sigma2, arrive_tol)
    rec = DoubleDisRec(d1, d2, float(sigma1), float(sigma2), uL, uMid, uR)
    if not (0.0 <= d1 <= d2 <= 1.0):
        return Build(Outcome.REJECT, rec, "d outside [0, 1]")
    if d1 == 1.0 and d2 == 1.0 and sigma1 > 0 and sigma2 > 0:
        return Build(Outcome.SHIFT_RIGHT, rec)
    if d1 == 0.0 and d2 == 0.0 and sigma1 < 0 and sigma2 < 0:
        return Build(Outcome.SHIFT_LEFT, rec)
    return Build(Outcome.ACCEPT, rec)


def _build(spec, u_j, conserved, admissible=None, arrive_tol=0.0):
    if admissible is not None:
        states = (spec.uL, spec.uMid, spec.uR) if isinstance(spec, DoubleSpec) else spec[1:]
        if not all(bool(admissible(as_state(v))) for v in states):
            return Build(Outcome.REJECT, None, "state outside the admissible set")
    if isinstance(spec, DoubleSpec):
        try:
            return build_double_disrec(spec.uL, spec.uMid, spec.uR, u_j, spec.sigma1,
                                       spec.sigma2, arrive_tol)
        except SingularSystem:
            return Build(Outcome.REJECT, None, "singular two-jump system")
    sigma, uL, uR = spec
    return disrec_from_states(u_j, sigma, uL, uR, conserved, arrive_tol)


# --------------------------------------------------------------------------
# marking
# --------------------------------------------------------------------------

@dataclass
class MarkSet:
    """Accepted reconstructions by cell index plus a log of decisions."""

    recs: dict = field(default_factory=dict)
    events: list = field(default_factory=list)
    binding: frozenset = frozenset()

    def __contains__(self, j):
        return j in self.recs

    def __len__(self):
        return len(self.recs)

    @property
    def indices(self):
        return sorted(self.recs)

    def dt_limit(self, dx):
        return min((r.dt_limit(dx) for r in self.recs.values()), default=np.inf)


def mark_cells(left_sides, right_sides, marker):
    """Indices ``j`` whose Riemann problem ``(left_sides[j], right_sides[j])``
    contains a shock according to ``marker``."""
    flags = np.asarray(marker(as_state(left_sides), as_state(right_sides)), dtype=bool)
    return np.flatnonzero(flags)


def exact_strategy(system, uL, uR, u_j=None):
    """Candidate reconstructions taken from the exact Riemann solution.

    One shock gives a single jump.  Two shocks moving the same way give a
    two-jump reconstruction when the system has two components; otherwise
    the faster shock is tried first and the slower one is the fallback.
    """
    fan = system.riemann(uL, uR)
    shocks = [w for w in fan.waves if type(w) is Shock]
    if not shocks:
        return []
    if len(shocks) == 1:
        s = shocks[0]
        return [(s.speed, s.uL, s.uR)]
    s1, s2 = shocks[0], shocks[-1]
    same_sign = (s1.speed >= 0 and s2.speed >= 0) or (s1.speed <= 0 and s2.speed <= 0)
    if same_sign and len(shocks) == 2 and system.n_vars == 2 and len(fan.waves) == 2:
        return [DoubleSpec(s1.speed, s2.speed, s1.uL, s1.uR, s2.uR)]
    order = sorted(shocks, key=lambda s: -abs(s.speed))
    return [(s.speed, s.uL, s.uR) for s in order]


def _batch_builds(U, left_sides, right_sides, candidates, batch, conserved, admissible,
                  arrived):
    idx = np.asarray(candidates, dtype=int)
    sigma, uL, uR = batch(left_sides[idx], right_sides[idx])
    cL, cR, cj = uL @ conserved, uR @ conserved, U[idx] @ conserved
    ok = cL != cR
    if admissible is not None:
        ok &= np.asarray(admissible(uL), bool) & np.asarray(admissible(uR), bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.where(ok, (cR - cj) / np.where(ok, cR - cL, 1.0), np.nan)
    # anything clearly outside [0, 1] is refused without building objects
    ok &= (d >= -ARRIVE_TOL) & (d <= 1.0 + ARRIVE_TOL)
    reject = Build(Outcome.REJECT, None, "inadmissible, degenerate or d outside [0, 1]")
    out = []
    for n, j in enumerate(idx.tolist()):
        if not ok[n]:
            out.append(reject)
            continue
        out.append(_classify(float(d[n]), float(sigma[n]), uL[n], uR[n],
                             ARRIVE_TOL if j in arrived else 0.0))
    return out


def resolve_marks(U, left_sides, right_sides, candidates, strategy, conserved,
                  periodic=False, admissible=None, arrived=(), compatible=None,
                  batch=None):
    """Turn candidate cells into a consistent set of reconstructions.

    Parameters
    ----------
    U : ndarray, shape (m, N)
        Cell averages.
    left_sides, right_sides : ndarray, shape (m, N)
        Riemann data used for marking each cell.
    candidates : sequence of int
        Marked cell indices.
    strategy : callable
        ``strategy(uL, uR, u_j) -> list of specs`` in priority order; a spec
        is ``(sigma, uL, uR)`` or a :class:`DoubleSpec`.
    conserved : ndarray
        Conserved functional coefficients.
    periodic : bool
        Wrap neighbour indices.
    admissible : callable, optional
        State predicate; specs with a state outside the set are refused.
    arrived : collection of int
        Cells whose jump limited the previous step and so should now sit on
        an interface.  Their ``d`` snaps within ``ARRIVE_TOL`` of it, which
        stops the step from collapsing when the jump states are inexact.

    batch : callable, optional
        Vectorised single-jump strategy ``batch(L, R) -> (sigma, uL, uR)``
        used instead of ``strategy`` when given.
    compatible : callable, optional
        ``compatible(a, b)`` is true when traces ``a | b`` on the two sides
        of an interface produce no fluctuation (a stationary contact).
        Equal traces are always compatible.

    Notes
    -----
    Interior jumps are accepted first, largest conserved jump first, then
    jumps handed over by neighbours, then jumps sitting on an interface.
    A reconstruction is refused when a trace it shows to an accepted
    neighbour is not compatible with the trace that neighbour shows back,
    which rules out the same shock being reconstructed twice.
    """
    m = len(U)
    out = MarkSet()
    if len(candidates) == 0:
        return out

    def nb(j, k):
        i = j + k
        if periodic:
            return i % m
        return i if 0 <= i < m else None

    interior, edges, transfers = [], [], []
    first = _batch_builds(U, left_sides, right_sides, candidates, batch, conserved,
                          admissible, arrived) if batch is not None else None
    for n, j in enumerate(candidates):
        if first is not None:
            b = first[n]
            chosen = b if b.outcome is not Outcome.REJECT else None
        else:
            try:
                specs = strategy(left_sides[j], right_sides[j], U[j])
            except SolverFailure:
                out.events.append(("no-solution", j))
                continue
            chosen = None
            for spec in specs:
                b = _build(spec, U[j], conserved, admissible,
                           ARRIVE_TOL if j in arrived else 0.0)
                if b.outcome is not Outcome.REJECT:
                    chosen = b
                    break
        if chosen is None:
            out.events.append(("reject", j))
            continue
        rec = chosen.rec
        if chosen.outcome is Outcome.SHIFT_RIGHT:
            transfers.append((j, +1, rec.spec()))
            continue
        if chosen.outcome is Outcome.SHIFT_LEFT:
            transfers.append((j, -1, rec.spec()))
            continue
        if isinstance(rec, DoubleDisRec):
            # a jump already on the outgoing interface is handed over
            if rec.d2 == 1.0 and rec.sigma2 > 0:
                transfers.append((j, +1, (rec.sigma2, rec.uMid, rec.uR)))
                rec = DisRec(rec.d1, rec.sigma1, rec.uL, rec.uMid)
                out.events.append(("split", j))
            elif rec.d1 == 0.0 and rec.sigma1 < 0:
                transfers.append((j, -1, (rec.sigma1, rec.uL, rec.uMid)))
                rec = DisRec(rec.d2, rec.sigma2, rec.uMid, rec.uR)
                out.events.append(("split", j))
        jump = abs((right_sides[j] - left_sides[j]) @ conserved)
        (edges if rec.edge else interior).append((j, rec, jump))

    def same(a, b):
        if _close(a, b, FACE_TOL):
            return True
        return compatible is not None and bool(compatible(a, b))

    def fits(j, rec):
        """Traces facing accepted neighbours must agree."""
        k = nb(j, -1)
        if k is not None and k in out.recs and not same(out.recs[k].right_state, rec.left_state):
            return False
        k = nb(j, +1)
        if k is not None and k in out.recs and not same(rec.right_state, out.recs[k].left_state):
            return False
        return True

    def accept(j, rec, tag):
        if j in out.recs:
            return False
        if not fits(j, rec):
            out.events.append((tag, j))
            return False
        out.recs[j] = rec
        return True

    for j, rec, _ in sorted(interior, key=lambda t: (-t[2], t[0])):
        accept(j, rec, "conflict")

    for src, k, spec in sorted(transfers, key=lambda t: t[0]):
        t = nb(src, k)
        if t is None or t in out.recs:
            continue
        b = _build(spec, U[t], conserved, admissible)
        if b.outcome is Outcome.ACCEPT and accept(t, b.rec, "conflict"):
            out.events.append(("shift", src, t))

    for j, rec, _ in sorted(edges, key=lambda t: t[0]):
        accept(j, rec, "edge-conflict")
    return out
