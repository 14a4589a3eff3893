"""Gas dynamics in Lagrangian coordinates, perfect gas.

Stored state is ``(tau, u, e)`` (specific volume, velocity, internal
energy) with ``p = (gamma - 1) e / tau``.  Riemann data are usually given
in ``(tau, u, p)``; see :func:`from_primitive`.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

from ..core import Contact, PathFamily, Rarefaction, Shock, SystemModel, WaveFan, as_state
from ..errors import DomainError, NoSolution, RootFindFailure

__all__ = [
    "LagrangianGas",
    "GasSegmentPath",
    "from_primitive",
    "to_primitive",
    "gd_exact_riemann",
    "gd_strategy",
    "gamma_from_jump",
]

MARK_TOL = 1e-12
SNAP = 1e-13


def from_primitive(w, gamma=1.4):
    """``(tau, u, p) -> (tau, u, e)``."""
    w = as_state(w)
    out = w.copy()
    out[..., 2] = w[..., 2] * w[..., 0] / (gamma - 1.0)
    return out


def to_primitive(u, gamma=1.4):
    """``(tau, u, e) -> (tau, u, p)``."""
    u = as_state(u)
    out = u.copy()
    out[..., 2] = (gamma - 1.0) * u[..., 2] / u[..., 0]
    return out


def gamma_from_jump(wl, wr):
    """Adiabatic exponent making a primitive-variable shock pair satisfy
    the energy jump condition ``sigma [e] = p_bar [u]``.

    ``sigma`` is taken from ``sigma [u] = [p]``.
    """
    tl, ul, pl = wl
    tr, ur, pr = wr
    sigma = (pr - pl) / (ur - ul)
    # sigma (p_r tau_r - p_l tau_l) / (g - 1) = p_bar [u]
    return 1.0 + sigma * (pr * tr - pl * tl) / (0.5 * (pl + pr) * (ur - ul))


class GasSegmentPath(PathFamily):
    """Straight segments in ``(tau, u, p)``."""

    def __init__(self, gamma):
        self.gamma = gamma

    def phi(self, s, uL, uR):
        wl = to_primitive(uL, self.gamma)
        wr = to_primitive(uR, self.gamma)
        w = wl + np.multiply.outer(np.asarray(s, float), wr - wl)
        return from_primitive(w, self.gamma)

    def phi_ds(self, s, uL, uR):
        g = self.gamma
        wl = to_primitive(uL, g)
        wr = to_primitive(uR, g)
        dw = wr - wl
        w = wl + np.multiply.outer(np.asarray(s, float), dw)
        out = np.broadcast_to(dw, w.shape).copy()
        out[..., 2] = (dw[2] * w[..., 0] + w[..., 2] * dw[0]) / (g - 1.0)
        return out

    def closed_form(self, system, uL, uR):
        wl = to_primitive(uL, self.gamma)
        wr = to_primitive(uR, self.gamma)
        du = wr[..., 1] - wl[..., 1]
        dp = wr[..., 2] - wl[..., 2]
        pbar = 0.5 * (wl[..., 2] + wr[..., 2])
        return np.stack([-du, dp, pbar * du], -1)


class LagrangianGas(SystemModel):
    """Lagrangian gas dynamics with the ``(tau, u, p)`` segment path.

    Parameters
    ----------
    gamma : float
        Ratio of specific heats, ``> 1``.
    """

    n_vars = 3
    names = ("tau", "u", "e")

    def __init__(self, gamma=1.4):
        if not gamma > 1.0:
            raise ValueError("gamma must exceed 1")
        self.gamma = float(gamma)
        self.path = GasSegmentPath(self.gamma)
        self.conserved = np.array([1.0, 0.0, 0.0])

    def __repr__(self):
        return f"LagrangianGas(gamma={self.gamma})"

    def pressure(self, u):
        u = as_state(u)
        return (self.gamma - 1.0) * u[..., 2] / u[..., 0]

    def matrix(self, u):
        u = as_state(u)
        g1 = self.gamma - 1.0
        tau, e = u[..., 0], u[..., 2]
        z = np.zeros_like(tau)
        return np.stack([
            np.stack([z, -np.ones_like(tau), z], -1),
            np.stack([-g1 * e / tau**2, z, g1 / tau], -1),
            np.stack([z, g1 * e / tau, z], -1),
        ], -2)

    def in_domain(self, u):
        u = as_state(u)
        return np.isfinite(u).all(axis=-1) & (u[..., 0] > 0) & (u[..., 2] > 0)

    def _eigen_tp(self, tau, p):
        c = np.sqrt(self.gamma * p / tau)
        one = np.ones_like(tau)
        lam = np.stack([-c, np.zeros_like(c), c], -1)
        R = np.stack([
            np.stack([one, one, one], -1),
            np.stack([c, np.zeros_like(c), -c], -1),
            np.stack([-p, p / (self.gamma - 1.0), -p], -1),
        ], -2)
        return lam, R

    def eigen(self, u):
        u = as_state(u)
        return self._eigen_tp(u[..., 0], self.pressure(u))

    def max_speed(self, U):
        U = as_state(U)
        return float(np.max(np.sqrt(self.gamma * self.pressure(U) / U[..., 0])))

    def _roe_tp(self, uL, uR):
        tau = 0.5 * (as_state(uL)[..., 0] + as_state(uR)[..., 0])
        p = 0.5 * (self.pressure(uL) + self.pressure(uR))
        return tau, p

    def roe_matrix(self, uL, uR):
        tau, p = self._roe_tp(uL, uR)
        ubar = 0.5 * (as_state(uL) + as_state(uR))
        ubar[..., 2] = p * tau / (self.gamma - 1.0)
        ubar[..., 0] = tau
        return self.matrix(ubar)

    def roe_eigen(self, uL, uR):
        return self._eigen_tp(*self._roe_tp(uL, uR))

    def riemann(self, uL, uR):
        return gd_exact_riemann(uL, uR, self.gamma)

    def marker(self, Uprev, Unext):
        Uprev = as_state(Uprev)
        Unext = as_state(Unext)
        scale = np.maximum(np.abs(Uprev), np.abs(Unext)).max(axis=-1)
        differ = np.abs(Unext - Uprev).max(axis=-1) > MARK_TOL * scale
        return differ & (Uprev[..., 1] >= Unext[..., 1])

    def strategy(self, u_prev, u_next, u_j=None):
        return [gd_strategy(u_prev, u_next, self.gamma)]

    def strategy_batch(self, u_prev, u_next):
        return gd_strategy_batch(u_prev, u_next, self.gamma)


def gd_strategy(u_prev, u_next, gamma=1.4):
    """Roe-based choice of ``(sigma, uL, uR)`` for a marked cell."""
    sigma, uL, uR = gd_strategy_batch(as_state(u_prev)[None], as_state(u_next)[None], gamma)
    return float(sigma[0]), uL[0], uR[0]


def gd_strategy_batch(u_prev, u_next, gamma=1.4):
    """Vectorised :func:`gd_strategy` over rows of ``u_prev``/``u_next``.

    Returns
    -------
    sigma : ndarray, shape (k,)
    uL, uR : ndarray, shape (k, 3)
    """
    u_prev = as_state(u_prev)
    u_next = as_state(u_next)
    lam, R = LagrangianGas(gamma).roe_eigen(u_prev, u_next)
    alpha = np.linalg.solve(R, (u_next - u_prev)[..., None])[..., 0]
    one = u_next[:, 0] - u_prev[:, 0] < 0
    still = u_prev[:, 1] == u_next[:, 1]
    sigma = np.where(one, lam[:, 0], lam[:, 2])
    uL = np.where(one[:, None], u_prev, u_next - alpha[:, 2:3] * R[:, :, 2])
    uR = np.where(one[:, None], u_prev + alpha[:, 0:1] * R[:, :, 0], u_next)
    sigma = np.where(still, 0.0, sigma)
    uL = np.where(still[:, None], u_prev, uL)
    uR = np.where(still[:, None], u_next, uR)
    return sigma, uL, uR


# --------------------------------------------------------------------------
# exact Riemann solver
# --------------------------------------------------------------------------

def _pressure_function(p, tau_k, p_k, gamma):
    """Velocity change across a 1- or 3-wave reaching pressure ``p``."""
    if p > p_k:
        a = 2.0 * tau_k / (gamma + 1.0)
        b = (gamma - 1.0) / (gamma + 1.0) * p_k
        return (p - p_k) * np.sqrt(a / (p + b))
    c = np.sqrt(gamma * p_k * tau_k)
    return 2.0 * c / (gamma - 1.0) * ((p / p_k) ** ((gamma - 1.0) / (2.0 * gamma)) - 1.0)


def _fan_sampler(tau_k, u_k, p_k, gamma, side):
    """Sampler for the 1-fan (``side=-1``) or 3-fan (``side=+1``)."""
    K = p_k * tau_k**gamma
    c_k = np.sqrt(gamma * p_k * tau_k)
    g1 = gamma - 1.0

    def sample(xi):
        xi = np.asarray(xi, dtype=float)
        C = side * xi
        tau = (gamma * K / C**2) ** (1.0 / (gamma + 1.0))
        p = K * tau ** (-gamma)
        c = np.sqrt(gamma * p * tau)
        u = u_k - side * 2.0 * (c_k - c) / g1
        return np.stack([tau, u, p * tau / g1], -1)

    return sample


def gd_exact_riemann(uL, uR, gamma=1.4):
    """Exact solution of the Lagrangian Riemann problem.

    Intermediate pressure from the usual pressure-function root; shock
    speeds and specific volumes from the jump conditions, so every shock
    satisfies them to round-off.
    """
    uL = as_state(uL)
    uR = as_state(uR)
    g = gamma
    if not (uL[0] > 0 and uR[0] > 0 and uL[2] > 0 and uR[2] > 0):
        raise DomainError("gas states need tau > 0 and e > 0")
    if np.array_equal(uL, uR):
        return WaveFan(uL, uR, ())
    tl, ul, pl = to_primitive(uL, g)
    tr, ur, pr = to_primitive(uR, g)
    cl = np.sqrt(g * pl * tl)
    cr = np.sqrt(g * pr * tr)
    du = ur - ul
    if 2.0 * (cl + cr) / (g - 1.0) <= du:
        raise NoSolution("data generate vacuum")

    def f(p):
        return _pressure_function(p, tl, pl, g) + _pressure_function(p, tr, pr, g) + du

    lo = 1e-14 * min(pl, pr)
    hi = max(pl, pr)
    while f(hi) < 0:
        hi *= 2.0
        if hi > 1e30:
            raise RootFindFailure("no pressure bracket up to 1e30")
    if f(lo) > 0:
        raise NoSolution("intermediate pressure would vanish")
    pstar = brentq(f, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=500)
    if abs(pstar - pl) <= SNAP * pl and abs(pstar - pr) > SNAP * pr:
        pstar = pl
    elif abs(pstar - pr) <= SNAP * pr and abs(pstar - pl) > SNAP * pl:
        pstar = pr
    ustar = 0.5 * (ul + ur) + 0.5 * (_pressure_function(pstar, tr, pr, g)
                                     - _pressure_function(pstar, tl, pl, g))

    waves = []
    # 1-wave
    if pstar == pl:
        ustar = ul
        sL = uL
    elif pstar > pl:
        sigma = -np.sqrt((pstar + (g - 1) / (g + 1) * pl) / (2.0 * tl / (g + 1)))
        tstar = tl - (ustar - ul) / sigma
        sL = from_primitive([tstar, ustar, pstar], g)
        waves.append(Shock(float(sigma), uL, sL, family=1))
    else:
        tstar = tl * (pl / pstar) ** (1.0 / g)
        sL = from_primitive([tstar, ustar, pstar], g)
        head = -np.sqrt(g * pl / tl)
        tail = -np.sqrt(g * pstar / tstar)
        waves.append(Rarefaction(1, uL, sL, float(head), float(tail),
                                 _fan_sampler(tl, ul, pl, g, -1)))
    # 3-wave, built first so the contact can be checked
    if pstar == pr:
        ustar = ur if pstar != pl else ustar
        sR = uR
        right = None
    elif pstar > pr:
        sigma = np.sqrt((pstar + (g - 1) / (g + 1) * pr) / (2.0 * tr / (g + 1)))
        tstar = tr + (ur - ustar) / sigma
        sR = from_primitive([tstar, ustar, pstar], g)
        right = Shock(float(sigma), sR, uR, family=3)
    else:
        tstar = tr * (pr / pstar) ** (1.0 / g)
        sR = from_primitive([tstar, ustar, pstar], g)
        head = np.sqrt(g * pstar / tstar)
        tail = np.sqrt(g * pr / tr)
        right = Rarefaction(3, sR, uR, float(head), float(tail),
                            _fan_sampler(tr, ur, pr, g, +1))
    scale = np.max(np.abs(sL)) + np.max(np.abs(sR))
    if np.max(np.abs(sL - sR)) <= SNAP * scale:
        if right is not None:
            right = _rebase(right, sL)
    else:
        waves.append(Contact(0.0, sL, sR, family=2))
    if right is not None:
        waves.append(right)
    return WaveFan(uL, uR, tuple(waves))


def _rebase(wave, left):
    if isinstance(wave, Rarefaction):
        return Rarefaction(wave.family, left, wave.uR, wave.head, wave.tail, wave.sample)
    # re-derive the speed from sigma [tau] = -[u] with the merged left state
    speed = -(wave.uR[1] - left[1]) / (wave.uR[0] - left[0])
    return Shock(float(speed), left, wave.uR, family=wave.family)
