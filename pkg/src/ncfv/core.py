"""System-agnostic building blocks: systems, paths, wave fans and fluctuations.

States are numpy arrays whose last axis holds the N components.  Most
routines accept a single state of shape ``(N,)`` or a batch ``(..., N)``.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DegenerateSpectrum, DomainError, SolverFailure

__all__ = [
    "GAUSS_NODES",
    "GAUSS_WEIGHTS",
    "Spectrum",
    "FluctuationPair",
    "PathFamily",
    "SegmentPath",
    "PolylinePath",
    "SystemModel",
    "Shock",
    "Contact",
    "Rarefaction",
    "WaveFan",
    "eigen_decompose",
    "path_integral",
    "path_integral_quadrature",
    "roe_fluctuations",
    "roe_fluctuations_batch",
    "godunov_fluctuations",
    "generalized_rh_residual",
    "fan_cell_averages",
]

SPECTRAL_GAP = 1e-12

# 8-point Gauss-Legendre rule mapped to [0, 1]
_x, _w = np.polynomial.legendre.leggauss(8)
GAUSS_NODES = 0.5 * (_x + 1.0)
GAUSS_WEIGHTS = 0.5 * _w
del _x, _w


def as_state(u):
    return np.asarray(u, dtype=float)


# --------------------------------------------------------------------------
# small containers
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Spectrum:
    """Sorted eigenvalues and matching right eigenvectors (as columns)."""

    values: np.ndarray
    vectors: np.ndarray

    def coordinates(self, du):
        """Coordinates of ``du`` in the eigenbasis."""
        return np.linalg.solve(self.vectors, as_state(du))


@dataclass(frozen=True)
class FluctuationPair:
    d_minus: np.ndarray
    d_plus: np.ndarray

    @property
    def total(self):
        return self.d_minus + self.d_plus


# --------------------------------------------------------------------------
# paths
# --------------------------------------------------------------------------

class PathFamily(abc.ABC):
    """Family of Lipschitz paths joining two states.

    A path is described as one or more smooth legs; quadrature is applied
    leg by leg so corners are never integrated across.
    """

    def legs(self, uL, uR) -> list[tuple[Callable, Callable]]:
        """Return ``[(phi, phi_ds), ...]`` with every leg parametrised on [0, 1]."""
        return [(lambda s: self.phi(s, uL, uR), lambda s: self.phi_ds(s, uL, uR))]

    @abc.abstractmethod
    def phi(self, s, uL, uR):
        ...

    @abc.abstractmethod
    def phi_ds(self, s, uL, uR):
        ...

    def closed_form(self, system, uL, uR):
        """Exact path integral, or ``None`` when no closed form is known.

        Implementations must accept batches of states.
        """
        return None


class PolylinePath(PathFamily):
    """Piecewise linear path through a list of vertices.

    Subclasses provide :meth:`vertices`; the default is the straight segment.
    """

    def vertices(self, uL, uR) -> list:
        return [uL, uR]

    def legs(self, uL, uR):
        verts = [as_state(v) for v in self.vertices(as_state(uL), as_state(uR))]
        out = []
        for a, b in zip(verts[:-1], verts[1:]):
            out.append((lambda s, a=a, b=b: a + np.multiply.outer(s, b - a),
                        lambda s, a=a, b=b: np.broadcast_to(b - a, np.shape(s) + a.shape)))
        return out

    def _locate(self, s, uL, uR):
        verts = [as_state(v) for v in self.vertices(as_state(uL), as_state(uR))]
        n = len(verts) - 1
        s = np.asarray(s, dtype=float)
        k = np.clip(np.floor(s * n).astype(int), 0, n - 1)
        return verts, n, k, s * n - k

    def phi(self, s, uL, uR):
        verts, n, k, r = self._locate(s, uL, uR)
        V = np.array(verts)
        return V[k] + r[..., None] * (V[k + 1] - V[k])

    def phi_ds(self, s, uL, uR):
        verts, n, k, r = self._locate(s, uL, uR)
        V = np.array(verts)
        return n * (V[k + 1] - V[k])


class SegmentPath(PolylinePath):
    """Straight segment ``uL + s (uR - uL)`` in the stored variables."""


# --------------------------------------------------------------------------
# systems
# --------------------------------------------------------------------------

class SystemModel(abc.ABC):
    """Interface every hyperbolic system implements.

    Attributes
    ----------
    n_vars : int
        Number of components N.
    names : tuple of str
        Component labels.
    conserved : ndarray
        Coefficients of the conserved linear functional used to place
        in-cell discontinuities.
    path : PathFamily
        Active family of paths.
    """

    n_vars: int = 0
    names: tuple = ()
    conserved: np.ndarray
    path: PathFamily

    @abc.abstractmethod
    def matrix(self, u):
        """A(u), shape ``(..., N, N)``."""

    @abc.abstractmethod
    def in_domain(self, u):
        """Boolean (array) membership in the admissible set."""

    @abc.abstractmethod
    def eigen(self, u):
        """Closed-form ``(values, vectors)`` with values sorted ascending."""

    @abc.abstractmethod
    def roe_matrix(self, uL, uR):
        ...

    def roe_eigen(self, uL, uR):
        """Eigenstructure of the Roe matrix; generic numeric fallback."""
        lam, R = np.linalg.eig(self.roe_matrix(uL, uR))
        order = np.argsort(lam.real, axis=-1)
        lam = np.take_along_axis(lam.real, order, axis=-1)
        R = np.take_along_axis(R.real, order[..., None, :], axis=-1)
        return lam, R

    @abc.abstractmethod
    def riemann(self, uL, uR) -> "WaveFan":
        ...

    def max_speed(self, U):
        lam, _ = self.eigen(U)
        return float(np.max(np.abs(lam))) if np.size(lam) else 0.0

    def conserved_value(self, u):
        return as_state(u) @ self.conserved

    def path_integral_batch(self, UL, UR):
        """Path integral for batches; closed form when the path has one."""
        cf = self.path.closed_form(self, UL, UR)
        if cf is not None:
            return cf
        UL = np.atleast_2d(UL)
        UR = np.atleast_2d(UR)
        return np.array([path_integral_quadrature(self.path, self, a, b)
                         for a, b in zip(UL, UR)])

    def godunov_batch(self, UL, UR):
        """Godunov fluctuations for batches; generic wave-by-wave fallback."""
        UL = np.atleast_2d(UL)
        UR = np.atleast_2d(UR)
        dm = np.zeros_like(UL)
        dp = np.zeros_like(UL)
        for i, (a, b) in enumerate(zip(UL, UR)):
            if np.array_equal(a, b):
                continue
            f = godunov_fluctuations(self, a, b)
            dm[i] = f.d_minus
            dp[i] = f.d_plus
        return dm, dp

    def check_domain(self, u, what="state"):
        ok = np.asarray(self.in_domain(u))
        if not np.all(ok):
            raise DomainError(f"{what} outside the admissible set: {np.asarray(u)!r}")


# --------------------------------------------------------------------------
# wave fans
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Shock:
    speed: float
    uL: np.ndarray
    uR: np.ndarray
    family: int = 0

    @property
    def head(self):
        return self.speed

    @property
    def tail(self):
        return self.speed

    def contribution(self):
        return self.speed * (self.uR - self.uL)


@dataclass(frozen=True)
class Contact(Shock):
    """Linearly degenerate jump; same bookkeeping as a shock."""


@dataclass(frozen=True)
class Rarefaction:
    family: int
    uL: np.ndarray
    uR: np.ndarray
    head: float
    tail: float
    sample: Callable = field(repr=False)

    def integral(self, a, b, nsub=4):
        """Integral of the sampled state over ``xi`` in [a, b]."""
        if b <= a:
            return np.zeros_like(self.uL)
        edges = np.linspace(a, b, nsub + 1)
        total = np.zeros_like(self.uL)
        for lo, hi in zip(edges[:-1], edges[1:]):
            xi = lo + (hi - lo) * GAUSS_NODES
            total = total + (hi - lo) * (GAUSS_WEIGHTS @ self.sample_many(xi))
        return total

    def sample_many(self, xi):
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        return np.asarray(self.sample(xi)).reshape(xi.size, -1)

    def split_contribution(self):
        """Path integral of A along the fan, split at ``xi = 0``.

        Along an integral curve parametrised by its own speed,
        ``A(w) w' = xi w'``, so integration by parts gives
        ``int A(w) dw = [xi w] - int w dxi`` on any sub-interval.
        """
        def piece(a, b):
            if b <= a:
                return np.zeros_like(self.uL)
            wa = self.uL if a == self.head else self.sample(a)
            wb = self.uR if b == self.tail else self.sample(b)
            return b * wb - a * wa - self.integral(a, b)

        neg = piece(self.head, min(self.tail, 0.0))
        pos = piece(max(self.head, 0.0), self.tail)
        return neg, pos


@dataclass(frozen=True)
class WaveFan:
    """Ordered self-similar solution of a Riemann problem."""

    uL: np.ndarray
    uR: np.ndarray
    waves: tuple = ()

    def __post_init__(self):
        self.validate()

    def validate(self, tol=1e-9):
        prev = self.uL
        last_speed = -np.inf
        for w in self.waves:
            if not np.allclose(w.uL, prev, rtol=tol, atol=tol):
                raise SolverFailure("wave fan states do not chain")
            if w.head < last_speed - tol:
                raise SolverFailure("wave fan speeds are not ordered")
            last_speed = w.tail
            prev = w.uR
        if not np.allclose(prev, self.uR, rtol=tol, atol=tol):
            raise SolverFailure("wave fan does not end at the right state")

    @property
    def shocks(self):
        return [w for w in self.waves if type(w) is Shock]

    @property
    def states(self):
        return [self.uL] + [w.uR for w in self.waves]

    def sample(self, xi):
        """State at ``x/t = xi`` (right limit at a jump)."""
        u = self.uL
        for w in self.waves:
            if xi < w.head:
                return u
            if isinstance(w, Rarefaction) and xi < w.tail:
                return w.sample(xi)
            u = w.uR
        return u


# --------------------------------------------------------------------------
# operations
# --------------------------------------------------------------------------

def eigen_decompose(system: SystemModel, u) -> Spectrum:
    """Eigenvalues and right eigenvectors of A(u), checked for hyperbolicity."""
    u = as_state(u)
    system.check_domain(u)
    lam, R = system.eigen(u)
    if np.any(np.diff(lam) < SPECTRAL_GAP):
        raise DegenerateSpectrum(f"eigenvalues {lam} are not strictly separated")
    return Spectrum(np.asarray(lam, float), np.asarray(R, float))


def path_integral_quadrature(path: PathFamily, system: SystemModel, uL, uR, panels=8):
    """Composite Gauss-Legendre evaluation of the path integral, leg by leg."""
    uL = as_state(uL)
    uR = as_state(uR)
    total = np.zeros_like(uL)
    if np.array_equal(uL, uR):
        return total
    s = ((np.arange(panels)[:, None] + GAUSS_NODES[None, :]) / panels).ravel()
    w = np.tile(GAUSS_WEIGHTS, panels) / panels
    for phi, dphi in path.legs(uL, uR):
        pts = phi(s)
        if not np.all(system.in_domain(pts)):
            raise DomainError("path leaves the admissible set")
        integrand = np.einsum("kij,kj->ki", system.matrix(pts), dphi(s))
        total = total + w @ integrand
    return total


def path_integral(path: PathFamily, system: SystemModel, uL, uR, closed_form=True):
    """Integral of A(phi) dphi/ds over the path from ``uL`` to ``uR``."""
    uL = as_state(uL)
    uR = as_state(uR)
    system.check_domain(uL)
    system.check_domain(uR)
    if np.array_equal(uL, uR):
        return np.zeros_like(uL)
    if closed_form:
        cf = path.closed_form(system, uL, uR)
        if cf is not None:
            return np.asarray(cf, float)
    return path_integral_quadrature(path, system, uL, uR)


def roe_fluctuations_batch(system: SystemModel, UL, UR):
    """Roe fluctuations ``(D-, D+)`` for arrays of interface states."""
    UL = np.atleast_2d(as_state(UL))
    UR = np.atleast_2d(as_state(UR))
    dm = np.zeros_like(UL)
    dp = np.zeros_like(UL)
    act = np.any(UL != UR, axis=-1)
    if not np.any(act):
        return dm, dp
    a, b = UL[act], UR[act]
    lam, R = system.roe_eigen(a, b)
    if np.any(np.diff(lam, axis=-1) < SPECTRAL_GAP):
        raise DegenerateSpectrum("Roe matrix lost strict hyperbolicity")
    alpha = np.linalg.solve(R, (b - a)[..., None])[..., 0]
    dm[act] = np.einsum("...ij,...j->...i", R, np.minimum(lam, 0.0) * alpha)
    dp[act] = np.einsum("...ij,...j->...i", R, np.maximum(lam, 0.0) * alpha)
    return dm, dp


def roe_fluctuations(system: SystemModel, uL, uR) -> FluctuationPair:
    """Roe fluctuations ``A^{+-}(uR - uL)`` for one interface."""
    dm, dp = roe_fluctuations_batch(system, uL, uR)
    return FluctuationPair(dm[0], dp[0])


def godunov_fluctuations(system: SystemModel, uL, uR, solver=None) -> FluctuationPair:
    """Godunov fluctuations accumulated wave by wave from the exact fan.

    Jumps contribute ``sigma (uR - uL)`` to the side their speed points to;
    an exactly stationary jump contributes nothing.  Rarefactions are
    integrated along the sampled fan and split at ``xi = 0``.
    """
    uL = as_state(uL)
    uR = as_state(uR)
    dm = np.zeros_like(uL)
    dp = np.zeros_like(uL)
    if np.array_equal(uL, uR):
        return FluctuationPair(dm, dp)
    solver = solver or system.riemann
    try:
        fan = solver(uL, uR)
    except SolverFailure:
        raise
    except Exception as exc:  # pragma: no cover - defensive
        raise SolverFailure(str(exc)) from exc
    for w in fan.waves:
        if isinstance(w, Rarefaction):
            neg, pos = w.split_contribution()
            dm = dm + neg
            dp = dp + pos
        elif w.speed < 0:
            dm = dm + w.contribution()
        elif w.speed > 0:
            dp = dp + w.contribution()
    return FluctuationPair(dm, dp)


def generalized_rh_residual(path: PathFamily, system: SystemModel, uL, uR, sigma):
    """``path_integral(uL, uR) - sigma (uR - uL)``."""
    uL = as_state(uL)
    uR = as_state(uR)
    return path_integral(path, system, uL, uR) - sigma * (uR - uL)


def fan_cell_averages(fan: WaveFan, edges, t, x0=0.0, nsub=2):
    """Exact cell averages of a Riemann solution over cells with given edges.

    Parameters
    ----------
    fan : WaveFan
    edges : array_like
        Cell interfaces, shape ``(m + 1,)``.
    t : float
        Time since the discontinuity was released from ``x0``.
    x0 : float
        Initial discontinuity location.
    nsub : int
        Gauss sub-intervals per cell for the rarefaction parts.
    """
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1], edges[1:]
    width = b - a
    n = fan.uL.shape[-1]
    acc = np.zeros((a.size, n))

    def add_const(lo, hi, state):
        ov = np.clip(np.minimum(b, hi) - np.maximum(a, lo), 0.0, None)
        acc[:] += ov[:, None] * state

    if t <= 0:
        add_const(-np.inf, x0, fan.uL)
        add_const(x0, np.inf, fan.uR)
        return acc / width[:, None]

    left = -np.inf
    state = fan.uL
    for w in fan.waves:
        xh = x0 + w.head * t
        add_const(left, xh, state)
        if isinstance(w, Rarefaction):
            xt = x0 + w.tail * t
            lo = np.maximum(a, xh)
            hi = np.minimum(b, xt)
            on = hi > lo
            if np.any(on):
                for i in np.flatnonzero(on):
                    sub = np.linspace(lo[i], hi[i], nsub + 1)
                    for s0, s1 in zip(sub[:-1], sub[1:]):
                        xs = s0 + (s1 - s0) * GAUSS_NODES
                        vals = w.sample_many((xs - x0) / t)
                        acc[i] += (s1 - s0) * (GAUSS_WEIGHTS @ vals)
            left = xt
        else:
            left = xh
        state = w.uR
    add_const(left, np.inf, state)
    return acc / width[:, None]
