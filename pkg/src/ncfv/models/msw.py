"""Modified shallow water system.

    h_t + q_x = 0
    q_t + (q^2 / h)_x + q h h_x = 0

The path crosses ``h`` first at fixed ``q`` and then ``q`` at fixed ``h``,
which gives the jump conditions

    sigma [h] = [q]
    sigma [q] = [q^2 / h] + q_l [h^2 / 2]
"""

from __future__ import annotations

import functools

import numpy as np
from scipy.optimize import brentq

from ..core import PolylinePath, Rarefaction, Shock, SystemModel, WaveFan, as_state
from ..errors import DomainError, NoRealRoot, RootFindFailure

__all__ = [
    "ModifiedShallowWater",
    "MSWPath",
    "msw_wave_curves",
    "msw_shock_state",
    "msw_shock_speed",
    "msw_classify",
    "msw_exact_riemann",
    "msw_strategy_roe",
    "lax_admissible",
]

MARK_TOL = 1e-12
SNAP = 1e-12
LAX_TOL = 1e-9


def _hu(U):
    U = as_state(U)
    return U[..., 0], U[..., 1] / U[..., 0]


def _lambdas(h, u):
    r = h * np.sqrt(u)
    return u - r, u + r


class MSWPath(PolylinePath):
    """``h`` varies first with ``q = q_l``, then ``q`` with ``h = h_r``."""

    def vertices(self, uL, uR):
        return [uL, np.array([uR[0], uL[1]]), uR]

    def closed_form(self, system, uL, uR):
        uL = as_state(uL)
        uR = as_state(uR)
        hl, ql = uL[..., 0], uL[..., 1]
        hr, qr = uR[..., 0], uR[..., 1]
        second = qr * qr / hr - ql * ql / hl + ql * 0.5 * (hr * hr - hl * hl)
        return np.stack([qr - ql, second], -1)


class ModifiedShallowWater(SystemModel):
    """Modified shallow water system with the two-leg path."""

    n_vars = 2
    names = ("h", "q")

    def __init__(self):
        self.path = MSWPath()
        self.conserved = np.array([1.0, 0.0])

    def __repr__(self):
        return "ModifiedShallowWater()"

    def matrix(self, u):
        h, v = _hu(u)
        z = np.zeros_like(h)
        return np.stack([np.stack([z, np.ones_like(h)], -1),
                         np.stack([-v * v + v * h * h, 2 * v], -1)], -2)

    def in_domain(self, u):
        u = as_state(u)
        return np.isfinite(u).all(axis=-1) & (u[..., 0] > 0) & (u[..., 1] > 0)

    def eigen(self, u):
        h, v = _hu(u)
        l1, l2 = _lambdas(h, v)
        lam = np.stack([l1, l2], -1)
        R = np.stack([np.ones_like(lam), lam], -2)
        return lam, R

    def _roe(self, uL, uR):
        hl, ul = _hu(uL)
        hr, ur = _hu(uR)
        sl, sr = np.sqrt(hl), np.sqrt(hr)
        ubar = (sl * ul + sr * ur) / (sl + sr)
        return ubar, as_state(uL)[..., 1] * 0.5 * (hl + hr)

    def roe_matrix(self, uL, uR):
        ubar, c2 = self._roe(uL, uR)
        z = np.zeros_like(ubar)
        return np.stack([np.stack([z, np.ones_like(z)], -1),
                         np.stack([-ubar * ubar + c2, 2 * ubar], -1)], -2)

    def roe_eigen(self, uL, uR):
        ubar, c2 = self._roe(uL, uR)
        c = np.sqrt(c2)
        lam = np.stack([ubar - c, ubar + c], -1)
        R = np.stack([np.ones_like(lam), lam], -2)
        return lam, R

    def riemann(self, uL, uR):
        return _riemann_cached(as_state(uL).tobytes(), as_state(uR).tobytes())

    def marker(self, Uprev, Unext):
        Uprev = as_state(Uprev)
        Unext = as_state(Unext)
        scale = np.maximum(np.abs(Uprev), np.abs(Unext)).max(axis=-1)
        differ = np.abs(Unext - Uprev).max(axis=-1) > MARK_TOL * scale
        return differ & (msw_classify(Uprev, Unext) <= 3)

    def strategy(self, u_prev, u_next, u_j=None):
        return [msw_strategy_roe(u_prev, u_next)]

    def strategy_batch(self, u_prev, u_next):
        return msw_strategy_roe_batch(u_prev, u_next)


# --------------------------------------------------------------------------
# wave curves
# --------------------------------------------------------------------------

@functools.lru_cache(maxsize=1 << 16)
def _riemann_cached(left, right):
    # keyed on the exact bit patterns; the fan is never mutated
    return msw_exact_riemann(np.frombuffer(left).copy(), np.frombuffer(right).copy())


def lax_admissible(uL, uR, sigma, family, tol=LAX_TOL):
    """Lax inequalities for a ``family``-shock from ``uL`` to ``uR``."""
    hl, ul = _hu(uL)
    hr, ur = _hu(uR)
    l1l, l2l = _lambdas(hl, ul)
    l1r, l2r = _lambdas(hr, ur)
    t = tol * (1.0 + abs(sigma))
    if family == 1:
        return l1r - t <= sigma <= l1l + t and sigma <= l2r + t
    return l2r - t <= sigma <= l2l + t and sigma >= l1l - t


def msw_shock_state(uL, h, family):
    """Right state at depth ``h`` on the ``family``-shock curve of ``uL``.

    Solves the jump conditions, whose velocity roots are
    ``u = u_l +- |h - h_l| sqrt(u_l (h + h_l) / (2 h))``, and keeps the
    Lax-admissible root.
    """
    uL = as_state(uL)
    hl, ul = _hu(uL)
    root = abs(h - hl) * np.sqrt(ul * (h + hl) / (2.0 * h))
    for u in (ul - root, ul + root):
        if u <= 0:
            continue
        cand = np.array([h, h * u])
        sigma = (cand[1] - uL[1]) / (h - hl)
        if lax_admissible(uL, cand, sigma, family):
            return cand
    raise NoRealRoot(f"no admissible {family}-shock from {uL} at h={h}")


def msw_shock_speed(uL, hR, family):
    """Shock speed from the closed-form speed relations."""
    hl, ul = _hu(uL)
    r = np.sqrt(hR * ul * (hl + hR) / 2.0)
    return ul - r if family == 1 else ul + r


def _rarefaction_u(hl, ul, h, family):
    s = np.sqrt(ul) + ((hl - h) if family == 1 else (h - hl)) / 2.0
    if s < 0:
        raise NoRealRoot("rarefaction curve leaves u > 0")
    return s * s


def msw_wave_curves(uL, h, family):
    """State ``(u, q)`` at depth ``h`` on the forward ``family`` wave curve."""
    uL = as_state(uL)
    hl, ul = _hu(uL)
    shock = (h > hl) if family == 1 else (h < hl)
    if h == hl:
        return float(ul), float(uL[1])
    if shock:
        st = msw_shock_state(uL, h, family)
        return st[1] / st[0], st[1]
    u = _rarefaction_u(hl, ul, h, family)
    return u, h * u


def msw_classify(u_prev, u_next):
    """Wave pattern of the Riemann problem.

    1: 1-shock + 2-rarefaction, 2: 1-rarefaction + 2-shock,
    3: two shocks, 4: two rarefactions (or equal states).
    """
    hl, ul = _hu(u_prev)
    hr, ur = _hu(u_next)
    hl, ul, hr, ur = np.broadcast_arrays(hl, ul, hr, ur)
    shock_curve = ul + np.sqrt(ul * (hr + hl) / (2.0 * hr)) * np.where(hr > hl, hl - hr, hr - hl)
    r2 = ((hr - hl) / 2.0 + np.sqrt(ul)) ** 2
    r1 = ((hl - hr) / 2.0 + np.sqrt(ul)) ** 2
    up = hr > hl
    down = hr < hl
    # states on a shock curve to round-off count as isolated shocks
    tol = MARK_TOL * np.maximum(1.0, np.abs(shock_curve))
    on_or_above = ur >= shock_curve - tol
    case = np.full(hl.shape, 4, dtype=int)
    case = np.where(up & on_or_above & (ur < r2), 1, case)
    case = np.where(down & on_or_above & (ur < r1), 2, case)
    case = np.where((up | down) & ~on_or_above, 3, case)
    case = np.where((hr == hl) & (ur < ul), 3, case)
    return case if case.ndim else int(case)


# --------------------------------------------------------------------------
# exact Riemann solver
# --------------------------------------------------------------------------

def _u1(hl, ul, h):
    """Forward 1-curve velocity (nan where it leaves u > 0)."""
    if h > hl:
        u = ul - (h - hl) * np.sqrt(ul * (h + hl) / (2.0 * h))
    else:
        s = np.sqrt(ul) + (hl - h) / 2.0
        u = s * s
    return u if u > 0 else np.nan


def _u2(hr, ur, h):
    """Left velocity at depth ``h`` that reaches ``(hr, ur)`` by a 2-wave."""
    if h > hr:
        b = (h - hr) * np.sqrt((hr + h) / (2.0 * hr))
        s = 0.5 * (b + np.sqrt(b * b + 4.0 * ur))
    else:
        s = np.sqrt(ur) - (hr - h) / 2.0
        if s <= 0:
            return np.nan
    return s * s


def _fan_1(hl, ul):
    K = np.sqrt(ul) + hl / 2.0

    def sample(xi):
        s = (2.0 * K + np.sqrt(4.0 * K * K + 12.0 * np.asarray(xi, float))) / 6.0
        h = 2.0 * (K - s)
        return np.stack([h, h * s * s], -1)

    return sample


def _fan_2(hl, ul):
    K = np.sqrt(ul) - hl / 2.0

    def sample(xi):
        s = (2.0 * K + np.sqrt(4.0 * K * K + 12.0 * np.asarray(xi, float))) / 6.0
        h = 2.0 * (s - K)
        return np.stack([h, h * s * s], -1)

    return sample


def _roots(G, hmax, n=800):
    grid = np.concatenate([np.geomspace(1e-6 * hmax, 1e-2 * hmax, 100, endpoint=False),
                           np.linspace(1e-2 * hmax, hmax, n)])
    vals = np.array([G(h) for h in grid])
    roots = []
    for i in range(len(grid) - 1):
        a, b = vals[i], vals[i + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if a == 0.0:
            roots.append(grid[i])
        elif a * b < 0:
            roots.append(brentq(G, grid[i], grid[i + 1], xtol=1e-300, rtol=1e-15, maxiter=500))
    return roots


def msw_exact_riemann(uL, uR):
    """Exact Riemann solution under the two-leg path with Lax shocks.

    The middle depth is the root of ``u1(h) - u2(h)`` where ``u1`` follows
    the forward 1-curve of ``uL`` and ``u2`` the backward 2-curve of
    ``uR``; the bracket comes from a sign-change scan.
    """
    uL = as_state(uL)
    uR = as_state(uR)
    if not (uL[0] > 0 and uL[1] > 0 and uR[0] > 0 and uR[1] > 0):
        raise DomainError("shallow water states need h > 0 and q > 0")
    if np.array_equal(uL, uR):
        return WaveFan(uL, uR, ())
    hl, ul = _hu(uL)
    hr, ur = _hu(uR)

    def G(h):
        return _u1(hl, ul, h) - _u2(hr, ur, h)

    tried = []
    for factor in (2.0, 8.0):
        hmax = factor * max(hl, hr)
        for hs in _roots(G, hmax):
            tried.append(hs)
            try:
                return _build_fan(uL, uR, hs)
            except (RootFindFailure, NoRealRoot):
                continue
    raise RootFindFailure(
        f"no admissible middle state for {uL} -> {uR}; scanned (0, {8 * max(hl, hr):.4g}], "
        f"sign changes at {tried}")


def _build_fan(uL, uR, hs):
    hl, ul = _hu(uL)
    hr, ur = _hu(uR)
    us = _u1(hl, ul, hs)
    if abs(hs - hl) <= SNAP * hl:
        star = uL
    elif abs(hs - hr) <= SNAP * hr:
        star = uR
    else:
        star = np.array([hs, hs * us])
    waves = []
    if star is not uL:
        if star[0] > hl:
            sigma = (star[1] - uL[1]) / (star[0] - hl)
            if not lax_admissible(uL, star, sigma, 1):
                raise RootFindFailure("1-shock fails the Lax inequalities")
            waves.append(Shock(float(sigma), uL, star, family=1))
        else:
            l1l, _ = _lambdas(hl, ul)
            l1s, _ = _lambdas(star[0], star[1] / star[0])
            if l1s < l1l:
                raise RootFindFailure("1-rarefaction is not expanding")
            waves.append(Rarefaction(1, uL, star, float(l1l), float(l1s), _fan_1(hl, ul)))
    if star is not uR:
        if star[0] > hr:
            sigma = (uR[1] - star[1]) / (hr - star[0])
            if not lax_admissible(star, uR, sigma, 2):
                raise RootFindFailure("2-shock fails the Lax inequalities")
            waves.append(Shock(float(sigma), star, uR, family=2))
        else:
            _, l2s = _lambdas(star[0], star[1] / star[0])
            _, l2r = _lambdas(hr, ur)
            if l2r < l2s:
                raise RootFindFailure("2-rarefaction is not expanding")
            waves.append(Rarefaction(2, star, uR, float(l2s), float(l2r),
                                     _fan_2(star[0], star[1] / star[0])))
    if len(waves) == 2 and waves[0].tail > waves[1].head + 1e-12:
        raise RootFindFailure("wave speeds out of order")
    # each shock must satisfy the jump conditions
    for w in waves:
        if isinstance(w, Shock):
            res = MSWPath().closed_form(None, w.uL, w.uR) - w.speed * (w.uR - w.uL)
            if np.max(np.abs(res)) > 1e-9 * (1.0 + np.max(np.abs(w.uR - w.uL))):
                raise RootFindFailure(f"jump residual {res}")
    return WaveFan(uL, uR, tuple(waves))


# --------------------------------------------------------------------------
# strategies
# --------------------------------------------------------------------------

def msw_strategy_roe(u_prev, u_next):
    """Roe-based ``(sigma, uL, uR)`` for a marked cell.

    The speed is the Roe eigenvalue of the selected family, so that the
    reconstructed jump carries exactly the Roe fluctuation.
    """
    sigma, uL, uR = msw_strategy_roe_batch(as_state(u_prev)[None], as_state(u_next)[None])
    return float(sigma[0]), uL[0], uR[0]


def msw_strategy_roe_batch(u_prev, u_next):
    """Vectorised :func:`msw_strategy_roe` over rows."""
    u_prev = as_state(u_prev)
    u_next = as_state(u_next)
    lam, R = ModifiedShallowWater().roe_eigen(u_prev, u_next)
    alpha = np.linalg.solve(R, (u_next - u_prev)[..., None])[..., 0]
    case = np.atleast_1d(msw_classify(u_prev, u_next))
    one = (case == 1) | ((case == 3) & (np.abs(alpha[:, 0]) > np.abs(alpha[:, 1])))
    sigma = np.where(one, lam[:, 0], lam[:, 1])
    uL = np.where(one[:, None], u_prev, u_next - alpha[:, 1:2] * R[:, :, 1])
    uR = np.where(one[:, None], u_prev + alpha[:, 0:1] * R[:, :, 0], u_next)
    return sigma, uL, uR
