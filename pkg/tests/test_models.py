import numpy as np
import pytest
from scipy.optimize import fsolve

from ncfv.core import Contact, Rarefaction, Shock, generalized_rh_residual
from ncfv.errors import ConnectFailure, DomainError, NoRealRoot
from ncfv.models import (CoupledBurgers, LagrangianGas, ModifiedShallowWater, cb_exact_riemann,
                         cb_strategy, cb_viscous_connect, from_primitive, gd_exact_riemann,
                         gd_strategy, msw_classify, msw_exact_riemann, msw_shock_speed,
                         msw_strategy_roe, msw_wave_curves, to_primitive)
from ncfv.models.burgers import smooth_solution
from ncfv.models.gas import gamma_from_jump
from ncfv.models.msw import lax_admissible, msw_shock_state

GAS1_L = np.array([2.09836065573770281, 2.3046638387921279, 1.0])
GAS1_R = np.array([8.0, 0.0, 0.1])
GAS2_L = np.array([5.0, 3.323013993227, 0.481481481481])
MSW_L = np.array([1.0, 1.0])
MSW_MID = np.array([1.8, 0.530039370688997])
MSW_R2 = np.array([1.5, 0.1855893974385])


def msw_jump(uL, uR, sigma):
    # sigma [h] = [q],  sigma [q] = [q^2/h] + q_l [h^2/2]
    (hl, ql), (hr, qr) = uL, uR
    return np.array([sigma * (hr - hl) - (qr - ql),
                     sigma * (qr - ql) - (qr**2 / hr - ql**2 / hl) - ql * (hr**2 - hl**2) / 2])


# -- coupled Burgers ---------------------------------------------------------

def test_burgers_contact_then_shock():
    uL, uR = np.array([5.0, 1.0]), np.array([1.0, 2.0])
    fan = cb_exact_riemann(uL, uR)
    c, s = fan.waves
    assert isinstance(c, Contact) and c.speed == 0.0
    assert type(s) is Shock and s.speed == pytest.approx(4.5)
    np.testing.assert_allclose(c.uR, [2.0, 4.0], atol=1e-14)
    # contact keeps the sum, shock keeps the ratio and obeys scalar Burgers
    assert c.uR.sum() == pytest.approx(uL.sum())
    assert s.speed * (3.0 - 6.0) == pytest.approx((3.0**2 - 6.0**2) / 2)


def test_burgers_contact_then_rarefaction():
    fan = cb_exact_riemann(np.array([1.0, 2.0]), np.array([5.0, 1.0]))
    c, r = fan.waves
    assert isinstance(c, Contact) and isinstance(r, Rarefaction)
    assert (r.head, r.tail) == (3.0, 6.0)
    np.testing.assert_allclose(r.sample(4.0), [4.0 * 5 / 6, 4.0 / 6])


def test_burgers_trivial_and_domain():
    u = np.array([1.0, 1.0])
    assert cb_exact_riemann(u, u).waves == ()
    with pytest.raises(DomainError):
        cb_exact_riemann(np.array([1.0, -2.0]), u)


def test_burgers_strategy():
    # the left shock state carries the right ratio at the left sum
    sigma, uL, uR = cb_strategy([7.99, 11.01], [0.25, 0.75])
    assert sigma == pytest.approx(10.0)
    np.testing.assert_allclose(uL, [4.75, 14.25], rtol=1e-14)
    sigma, uL, uR = cb_strategy([5.0, 1.0], [1.0, 2.0])
    assert sigma == pytest.approx(4.5)
    np.testing.assert_allclose(uL, [2.0, 4.0])
    s = CoupledBurgers("segments")
    assert np.max(np.abs(generalized_rh_residual(s.path, s, uL, uR, sigma))) <= 1e-13


def test_viscous_connect_keeps_the_sum_and_vanishes_with_the_jump():
    uL = np.array([7.99, 11.01])
    uR = cb_viscous_connect(uL, 1.0)
    assert uR.sum() == 1.0
    weak = cb_viscous_connect(uL, 18.9)
    np.testing.assert_allclose(weak, uL, atol=0.1)
    assert np.abs(weak - uL).max() < np.abs(cb_viscous_connect(uL, 18.0) - uL).max()
    with pytest.raises(ConnectFailure):
        cb_viscous_connect(uL, 20.0)


def test_viscous_connect_matches_an_independent_profile():
    # the sum solves viscous Burgers, s = sigma - mu tanh(mu x / 2); along it
    # the first component obeys the linear ODE u'' = u s' - sigma u'
    from scipy.integrate import solve_ivp
    uL = np.array([3.0, 1.0])
    s_l, s_r = 4.0, 2.0
    sigma, mu = 3.0, 1.0

    def s_of(x):
        return sigma - mu * np.tanh(mu * x / 2)

    def ds_of(x):
        return -mu * mu / 2 / np.cosh(mu * x / 2) ** 2

    def rhs(x, y):
        u, p = y
        return [p, u * ds_of(x) - sigma * p]

    x0 = -40.0
    # near x0 the state sits on the unstable manifold: u ~ uL[0] (s/s_l) there
    u0 = uL[0] * s_of(x0) / s_l
    p0 = uL[0] * ds_of(x0) / s_l
    sol = solve_ivp(rhs, (x0, 40.0), [u0, p0], method="DOP853", rtol=1e-12, atol=1e-14)
    expect = sol.y[0, -1]
    got = cb_viscous_connect(uL, s_r)
    assert got[0] == pytest.approx(expect, abs=1e-6)


def test_smooth_solution_characteristics_and_stationary_ratio():
    def u0(x):
        w = 0.5 + 0.25 * np.sin(2 * np.pi * x)
        return np.stack([w, 0.5 * w + 0.25], -1)

    x = np.linspace(0, 1, 7)
    u = smooth_solution(u0, x, 0.1)
    s = u.sum(-1)
    w0 = u0(x - s * 0.1)
    np.testing.assert_allclose(s, w0.sum(-1), atol=1e-12)
    # u / (u + v) is advected with zero speed
    r0 = u0(x)
    np.testing.assert_allclose(u / s[:, None], r0 / r0.sum(-1)[:, None], atol=1e-12)


# -- gas dynamics -------------------------------------------------------------

def test_gamma_recovered_from_the_published_shock():
    assert gamma_from_jump(GAS1_L, GAS1_R) == pytest.approx(1.4, abs=1e-6)


def test_primitive_round_trip():
    w = np.array([[2.0, 0.3, 1.5], [0.5, -1.0, 0.2]])
    np.testing.assert_allclose(to_primitive(from_primitive(w, 1.4), 1.4), w, rtol=1e-15)


def test_gas_test1_is_one_shock():
    g = LagrangianGas(1.4)
    uL, uR = from_primitive(GAS1_L), from_primitive(GAS1_R)
    fan = gd_exact_riemann(uL, uR)
    shocks = [w for w in fan.waves if not isinstance(w, Contact)]
    assert len(shocks) == 1
    s = shocks[0]
    assert s.speed == pytest.approx(0.9 / 2.3046638387921279, rel=1e-9)
    assert s.speed == pytest.approx(0.390512, abs=1e-6)
    assert np.max(np.abs(generalized_rh_residual(g.path, g, s.uL, s.uR, s.speed))) <= 1e-9
    # entropy: sigma [tau] >= 0
    assert s.speed * (s.uR[0] - s.uL[0]) >= 0


def test_gas_strategy_on_test1():
    g = LagrangianGas(1.4)
    sigma, uL, uR = gd_strategy(from_primitive(GAS1_L), from_primitive(GAS1_R))
    assert sigma == pytest.approx(0.390512, abs=1e-6)
    assert np.max(np.abs(generalized_rh_residual(g.path, g, uL, uR, sigma))) <= 1e-6
    u = from_primitive(GAS1_L)
    sigma, a, b = gd_strategy(u, u)
    assert sigma == 0.0


def test_gas_test2_three_waves_share_test1_shock():
    fan = gd_exact_riemann(from_primitive(GAS2_L), from_primitive(GAS1_R))
    kinds = [type(w).__name__ for w in fan.waves]
    assert kinds == ["Shock", "Contact", "Shock"]
    last = fan.waves[-1]
    np.testing.assert_allclose(last.uL, from_primitive(GAS1_L), atol=1e-9)
    np.testing.assert_allclose(last.uR, from_primitive(GAS1_R), atol=1e-9)


# -- modified shallow water ------------------------------------------------------

def test_msw_one_shock_state():
    u, q = msw_wave_curves(MSW_L, 1.8, 1)
    assert q == pytest.approx(0.530039370689, abs=1e-12)
    assert u == pytest.approx(0.294466317049443, rel=1e-9)
    assert msw_shock_speed(MSW_L, 1.8, 1) == pytest.approx(1 - np.sqrt(1.8 * 1.4), abs=1e-12)


def test_msw_two_shock_from_jump_conditions():
    # independent oracle: solve both jump conditions for (q_r, sigma)
    def f(z):
        return msw_jump(MSW_MID, np.array([1.5, z[0]]), z[1])
    q, sigma = fsolve(f, [0.2, 1.1], xtol=1e-14)
    st = msw_shock_state(MSW_MID, 1.5, 2)
    assert st[1] == pytest.approx(q, abs=1e-10)
    assert st[1] == pytest.approx(0.1855893974385, abs=1e-6)
    assert (st[1] - MSW_MID[1]) / (1.5 - 1.8) == pytest.approx(sigma, abs=1e-10)
    assert lax_admissible(MSW_MID, st, sigma, 2)


def test_msw_shock_state_reports_missing_branch():
    with pytest.raises(NoRealRoot):
        msw_shock_state(MSW_L, 1.8, 2)


@pytest.mark.parametrize("uR,case", [(MSW_MID, 1), (MSW_R2, 3), (MSW_L, 4),
                                     (np.array([0.5, 0.5]), 2)])
def test_msw_classify(uR, case):
    assert msw_classify(MSW_L, uR) == case


def test_msw_classify_two_rarefactions():
    u1, _ = msw_wave_curves(MSW_L, 0.6, 1)
    u2, q2 = msw_wave_curves(np.array([0.6, 0.6 * u1]), 0.8, 2)
    assert msw_classify(MSW_L, np.array([0.8, q2])) == 4


def test_msw_classify_one_rarefaction_two_shock():
    mid = np.array([0.6, 0.6 * msw_wave_curves(MSW_L, 0.6, 1)[0]])
    right = msw_shock_state(mid, 0.4, 2)
    assert msw_classify(MSW_L, right) == 2


def test_msw_exact_test2():
    fan = msw_exact_riemann(MSW_L, MSW_R2)
    s1, s2 = fan.waves
    np.testing.assert_allclose(s1.uR, MSW_MID, atol=1e-9)
    assert s1.speed == pytest.approx(-0.5874508, abs=1e-7)
    q, sigma = fsolve(lambda z: msw_jump(MSW_MID, np.array([1.5, z[0]]), z[1]), [0.2, 1.1],
                      xtol=1e-14)
    assert s2.speed == pytest.approx(sigma, abs=1e-9)
    for s, fam in ((s1, 1), (s2, 2)):
        assert np.max(np.abs(msw_jump(s.uL, s.uR, s.speed))) <= 1e-9
        assert lax_admissible(s.uL, s.uR, s.speed, fam)


def test_msw_exact_isolated_shock_and_trivial():
    fan = msw_exact_riemann(MSW_L, MSW_MID)
    assert len(fan.waves) == 1 and fan.waves[0].family == 1
    assert msw_exact_riemann(MSW_L, MSW_L).waves == ()


def test_msw_path_matches_jump_conditions():
    w = ModifiedShallowWater()
    fan = msw_exact_riemann(MSW_L, MSW_R2)
    for s in fan.waves:
        assert np.max(np.abs(generalized_rh_residual(w.path, w, s.uL, s.uR, s.speed))) <= 1e-9


def test_msw_roe_strategy_on_isolated_shock():
    w = ModifiedShallowWater()
    sigma, uL, uR = msw_strategy_roe(MSW_L, MSW_MID)
    lam, R = w.roe_eigen(MSW_L, MSW_MID)
    np.testing.assert_allclose(uL, MSW_L)
    assert sigma == pytest.approx(lam[0])
    # Roe-linear level: A_roe (uR - uL) = sigma (uR - uL)
    A = w.roe_matrix(MSW_L, MSW_MID)
    np.testing.assert_allclose(A @ (uR - uL), sigma * (uR - uL), atol=1e-12)


def test_msw_roe_strategy_tie_goes_to_the_second_family():
    w = ModifiedShallowWater()
    uL = np.array([1.0, 1.0])
    lam, R = w.roe_eigen(uL, uL)
    # equal amplitudes: the jump is R1 + R2 scaled, evaluated at the Roe
    # average of the pair itself, found by a short fixed point
    uR = uL + 0.05 * (R[:, 0] + R[:, 1])
    for _ in range(50):
        lam, R = w.roe_eigen(uL, uR)
        a = np.linalg.solve(R, uR - uL)
        uR = uL + 0.5 * (abs(a[0]) + abs(a[1])) * (np.sign(a[0]) * R[:, 0] + np.sign(a[1]) * R[:, 1])
    a = np.linalg.solve(w.roe_eigen(uL, uR)[1], uR - uL)
    assert abs(abs(a[0]) - abs(a[1])) < 1e-12
    if msw_classify(uL, uR) == 3:
        sigma, _, right = msw_strategy_roe(uL, uR)
        np.testing.assert_allclose(right, uR)
