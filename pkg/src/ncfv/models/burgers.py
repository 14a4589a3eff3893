"""Coupled Burgers system.

    u_t + u (u + v)_x = 0
    v_t + v (u + v)_x = 0

The sum ``s = u + v`` obeys the inviscid Burgers equation while the ratio
``u / s`` is carried by a stationary linearly degenerate field.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp

from ..core import (Contact, PolylinePath, Rarefaction, SegmentPath, Shock,
                    SystemModel, WaveFan, as_state)
from ..errors import ConnectFailure, DomainError

__all__ = [
    "CoupledBurgers",
    "BurgersSegmentPath",
    "BurgersViscousPath",
    "cb_exact_riemann",
    "cb_viscous_connect",
    "cb_strategy",
    "smooth_solution",
]

MARK_TOL = 1e-12


def _sums(U):
    U = as_state(U)
    return U[..., 0] + U[..., 1]


def _ratio_state(uR, s):
    """State with sum ``s`` sharing the component ratio of ``uR``."""
    uR = as_state(uR)
    return uR * (np.asarray(s) / _sums(uR))[..., None] if uR.ndim > 1 else uR * (s / _sums(uR))


class BurgersSegmentPath(SegmentPath):
    """Straight segments; integral ``(u_bar [s], v_bar [s])``."""

    def closed_form(self, system, uL, uR):
        uL = as_state(uL)
        uR = as_state(uR)
        ds = _sums(uR) - _sums(uL)
        return 0.5 * (uL + uR) * np.asarray(ds)[..., None]


class BurgersViscousPath(PolylinePath):
    """Path through the viscous-profile intermediate state.

    With identity viscosity the travelling profile of the genuinely
    nonlinear field keeps ``u / s`` constant, so the profile is a ray in
    state space.  The path runs along the stationary contact
    (constant sum) to ``u* = s_L uR / s_R`` and then along that ray.
    """

    def vertices(self, uL, uR):
        return [uL, _ratio_state(uR, _sums(uL)), uR]

    def closed_form(self, system, uL, uR):
        uL = as_state(uL)
        uR = as_state(uR)
        sl = np.asarray(_sums(uL))
        sr = np.asarray(_sums(uR))
        return uR * ((sr * sr - sl * sl) / (2.0 * sr))[..., None]


class CoupledBurgers(SystemModel):
    """Coupled Burgers system with a choice of path family.

    Parameters
    ----------
    path : {'segments', 'viscous'}
        Straight segments or the viscous-profile path.
    """

    n_vars = 2
    names = ("u", "v")

    def __init__(self, path="segments"):
        if path not in ("segments", "viscous"):
            raise ValueError(f"unknown Burgers path {path!r}")
        self.path_kind = path
        self.path = BurgersSegmentPath() if path == "segments" else BurgersViscousPath()
        self.conserved = np.array([1.0, 1.0])

    def __repr__(self):
        return f"CoupledBurgers(path={self.path_kind!r})"

    def matrix(self, u):
        u = as_state(u)
        a, b = u[..., 0], u[..., 1]
        return np.stack([np.stack([a, a], -1), np.stack([b, b], -1)], -2)

    def in_domain(self, u):
        u = as_state(u)
        return np.isfinite(u).all(axis=-1) & (_sums(u) > 0)

    def eigen(self, u):
        u = as_state(u)
        s = _sums(u)
        lam = np.stack([np.zeros_like(s), s], -1)
        R = np.stack([np.stack([np.ones_like(s), u[..., 0]], -1),
                      np.stack([-np.ones_like(s), u[..., 1]], -1)], -2)
        return lam, R

    def max_speed(self, U):
        return float(np.max(np.abs(_sums(U)))) if np.size(U) else 0.0

    def _roe_state(self, uL, uR):
        uL = as_state(uL)
        uR = as_state(uR)
        if self.path_kind == "segments":
            return 0.5 * (uL + uR)
        sl = np.asarray(_sums(uL))
        sr = np.asarray(_sums(uR))
        return uR * ((sl + sr) / (2.0 * sr))[..., None]

    def roe_matrix(self, uL, uR):
        return self.matrix(self._roe_state(uL, uR))

    def roe_eigen(self, uL, uR):
        return self.eigen(self._roe_state(uL, uR))

    def riemann(self, uL, uR):
        return cb_exact_riemann(uL, uR, self.path_kind)

    def godunov_batch(self, UL, UR):
        # every wave speed is >= 0, so the whole fan lands in D+
        UL = np.atleast_2d(as_state(UL))
        UR = np.atleast_2d(as_state(UR))
        sl = _sums(UL)
        sr = _sums(UR)
        dp = UR * ((sr * sr - sl * sl) / (2.0 * sr))[:, None]
        return np.zeros_like(UL), dp

    def marker(self, Uprev, Unext):
        sp = _sums(Uprev)
        sn = _sums(Unext)
        scale = np.maximum(np.abs(sp), np.abs(sn))
        return sp - sn > MARK_TOL * scale

    def strategy(self, u_prev, u_next, u_j=None):
        return [cb_strategy(u_prev, u_next, self.path_kind)]

    def strategy_batch(self, u_prev, u_next):
        u_prev = as_state(u_prev)
        u_next = as_state(u_next)
        sp, sn = _sums(u_prev), _sums(u_next)
        return 0.5 * (sp + sn), _ratio_state(u_next, sp), u_next.copy()


def cb_exact_riemann(uL, uR, path="segments", connect=None):
    """Exact Riemann solution: stationary contact then a shock or rarefaction.

    Parameters
    ----------
    uL, uR : array_like
        Riemann data.
    path : {'segments', 'viscous'}
        Both families lead to the same Hugoniot locus (ratio of the
        components preserved across the nonlinear wave).
    connect : callable, optional
        ``connect(u_left, s_right) -> u_right`` used for the viscous shock
        instead of the ratio rule, e.g. :func:`cb_viscous_connect`.
    """
    uL = as_state(uL)
    uR = as_state(uR)
    sl, sr = _sums(uL), _sums(uR)
    if sl <= 0 or sr <= 0:
        raise DomainError("Burgers states need u + v > 0")
    if np.array_equal(uL, uR):
        return WaveFan(uL, uR, ())
    if connect is not None and path == "viscous" and sl > sr:
        # invert the linear connection u_right = k u_left
        probe = connect(np.array([1.0, sl - 1.0]), sr)
        base = connect(np.array([0.0, sl]), sr)
        k = probe[0] - base[0]
        ustar = np.array([uR[0] / k, sl - uR[0] / k]) if k != 0 else _ratio_state(uR, sl)
    else:
        ustar = _ratio_state(uR, sl)
    waves = []
    if not np.allclose(ustar, uL, rtol=0, atol=1e-15 * max(1.0, abs(sl))):
        waves.append(Contact(0.0, uL, ustar, family=1))
    else:
        ustar = uL
    if sl > sr:
        waves.append(Shock(0.5 * (sl + sr), ustar, uR, family=2))
    elif sl < sr:
        ratio = uR / sr
        waves.append(Rarefaction(2, ustar, uR, float(sl), float(sr),
                                 lambda xi, r=ratio: np.multiply.outer(xi, r)))
    return WaveFan(uL, uR, tuple(waves))


def cb_strategy(u_prev, u_next, path="segments"):
    """Shock data ``(sigma, uL, uR)`` used for a marked cell."""
    u_prev = as_state(u_prev)
    u_next = as_state(u_next)
    sp, sn = _sums(u_prev), _sums(u_next)
    return 0.5 * (sp + sn), _ratio_state(u_next, sp), u_next


def cb_viscous_connect(uL, s_r, eps=1e-7, tol=1e-10):
    """Right state reached by the travelling viscous profile leaving ``uL``.

    Integrates ``v'' = (A(v) - sigma) v'`` from the unstable manifold of
    ``uL`` (one-dimensional, tangent to ``uL`` itself) until the
    derivative has decayed.

    Parameters
    ----------
    uL : array_like
        Left state with sum ``s_l``.
    s_r : float
        Requested right sum, ``0 < s_r < s_l``.

    Returns
    -------
    ndarray
        Right state; its sum is ``s_r`` exactly.
    """
    uL = as_state(uL)
    s_l = float(_sums(uL))
    if not (s_l > s_r > 0):
        raise ConnectFailure(f"need s_l > s_r > 0, got {s_l}, {s_r}")
    sigma = 0.5 * (s_l + s_r)
    mu = s_l - sigma
    amp = -eps / np.linalg.norm(uL)

    y0 = np.concatenate([uL + amp * uL / mu, amp * uL])
    sol = solve_ivp(lambda t, y: np.concatenate([y[2:], _accel(y[:2], y[2:], sigma)]),
                    (0.0, 90.0 / mu), y0, method="DOP853", rtol=1e-12, atol=1e-15)
    if not sol.success:
        raise ConnectFailure(sol.message)
    v, p = sol.y[:2, -1], sol.y[2:, -1]
    res = max(np.max(np.abs(p)), abs(v[0] + v[1] - s_r))
    if res > tol * max(1.0, s_l):
        raise ConnectFailure(f"profile boundary residual {res:.3e} exceeds {tol}")
    return np.array([v[0], s_r - v[0]])


def _accel(v, p, sigma):
    ds = p[0] + p[1]
    return v * ds - sigma * p


def smooth_solution(u0, x, t):
    """Classical solution for smooth data before the sum steepens.

    Parameters
    ----------
    u0 : callable
        ``u0(x) -> (..., 2)`` initial state.
    x : array_like
        Evaluation points.
    t : float
        Time; must precede the first gradient catastrophe of the sum.
    """
    x = np.asarray(x, dtype=float)
    w0 = np.asarray(u0(x))
    s0 = w0[..., 0] + w0[..., 1]
    ratio = w0 / s0[..., None]
    # characteristics of the sum: s = s0(x - s t), solved by Newton
    s = s0.copy()
    for _ in range(100):
        xi = x - s * t
        w = np.asarray(u0(xi))
        f = s - (w[..., 0] + w[..., 1])
        h = 1e-7
        wp = np.asarray(u0(xi + h))
        wm = np.asarray(u0(xi - h))
        dsdx = ((wp[..., 0] + wp[..., 1]) - (wm[..., 0] + wm[..., 1])) / (2 * h)
        step = f / (1.0 + t * dsdx)
        s = s - step
        if np.max(np.abs(step)) < 1e-15 * max(1.0, np.max(np.abs(s))):
            break
    return ratio * s[..., None]
