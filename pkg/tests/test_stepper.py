import numpy as np
import pytest

from ncfv.core import fan_cell_averages
from ncfv.errors import ConfigError, DomainError, MaxStepsExceeded
from ncfv.mesh import CellField, Grid1D, init_from_function, init_from_riemann
from ncfv.models import CoupledBurgers, LagrangianGas, ModifiedShallowWater, from_primitive
from ncfv.recon import DisRec, DoubleDisRec
from ncfv.registry import initial_function
from ncfv.stepper import (MARKED, NEIGHBOR, SMOOTH, SchemeConfig, assemble_cell_term, run,
                          step)

ROE_VARIANTS = ("O1_noDisRec", "O2_noDisRec", "O1_DisRec", "O2_DisRec")


def test_scheme_names_round_trip():
    for name in ROE_VARIANTS + ("O1_ExactDisRec", "O2_ExactDisRec"):
        assert SchemeConfig.from_name(name).name == name
    assert SchemeConfig.from_name("O2_DisRec", base="godunov").base == "godunov"


@pytest.mark.parametrize("kw", [dict(cfl=1.5), dict(cfl=0.0), dict(alpha=2.0), dict(order=3),
                                dict(base="hll"), dict(strategy="x"), dict(dt_max=0.0)])
def test_scheme_validation(kw):
    with pytest.raises(ConfigError):
        SchemeConfig(**kw)


def test_cell_terms():
    rec = DisRec(0.3, 10.0, np.array([7.99, 11.01]), np.array([0.25, 0.75]))
    np.testing.assert_allclose(assemble_cell_term(MARKED, rec=rec), [-77.4, -102.6])
    b = CoupledBurgers()
    u = np.array([1.0, 2.0])
    assert np.all(assemble_cell_term(SMOOTH, 0.1, b, u, np.zeros(2)) == 0)
    assert np.all(assemble_cell_term(NEIGHBOR, u_mid=u) == 0)
    np.testing.assert_allclose(assemble_cell_term(SMOOTH, 0.1, b, u, np.array([1.0, 0.0])),
                               0.1 * b.matrix(u) @ [1.0, 0.0])
    dd = DoubleDisRec(0.2, 0.7, -0.5, 1.1, np.array([1.0, 1.0]), np.array([1.8, 0.53]),
                      np.array([1.5, 0.19]))
    np.testing.assert_allclose(dd.cell_term(), -0.5 * np.array([0.8, -0.47])
                               + 1.1 * np.array([-0.3, -0.34]))


@pytest.mark.parametrize("name", ROE_VARIANTS)
@pytest.mark.parametrize("base", ["roe", "godunov"])
def test_constant_field_is_unchanged(name, base):
    for system, u in ((CoupledBurgers(), [1.0, 2.0]), (ModifiedShallowWater(), [1.0, 1.0]),
                      (LagrangianGas(), [1.0, 0.5, 2.0])):
        f = CellField.from_averages(Grid1D.from_bounds(0, 1, 20), np.tile(u, (20, 1)))
        new, rep = step(f, SchemeConfig.from_name(name, base=base), system)
        assert np.array_equal(new.averages, f.averages)
        assert rep.n_marked == 0


@pytest.mark.parametrize("name", ROE_VARIANTS)
@pytest.mark.parametrize("base", ["roe", "godunov"])
def test_stationary_burgers_is_preserved(name, base):
    grid = Grid1D.from_bounds(0, 1, 200)
    f = init_from_function(grid, initial_function("burgers.stationary"), nquad=4)
    system = CoupledBurgers()
    g = f
    for _ in range(5):
        g, _ = step(g, SchemeConfig.from_name(name, base=base), system)
        assert np.max(np.abs(g.averages - f.averages)) <= 1e-15


def test_isolated_shock_one_step():
    # cell 5 holds the shock at d; after one step it sits at d + sigma dt / dx
    grid = Grid1D.from_bounds(0, 1, 10)
    uL, uR = np.array([2.0, 2.0]), np.array([0.5, 0.5])
    f = init_from_riemann(grid, uL, uR, 0.52)
    system = CoupledBurgers()
    new, rep = step(f, SchemeConfig.from_name("O1_DisRec"), system)
    d = rep.marks.recs[5].d
    assert d == pytest.approx(0.2)
    theta = 2.5 * rep.dt / grid.dx
    np.testing.assert_allclose(new.averages[5], (d + theta) * uL + (1 - d - theta) * uR,
                               rtol=1e-14)
    np.testing.assert_allclose(new.averages[[4, 6]], [uL, uR], rtol=1e-14)


def _exact_tracker(system, uL, uR, x0, grid):
    fan = system.riemann(uL, uR)
    worst = [0.0]

    def cb(field, rep):
        ref = fan_cell_averages(fan, grid.edges, field.time, x0)
        worst[0] = max(worst[0], np.max(np.abs(field.averages - ref)))
    return cb, worst


@pytest.mark.parametrize("name", ["O1_DisRec", "O2_DisRec"])
def test_isolated_shock_exact_at_every_step(name):
    cases = [
        (CoupledBurgers("viscous"), [7.99, 11.01], [0.25, 0.75], (0, 1), 0.5, 0.03, "godunov"),
        (LagrangianGas(1.4), from_primitive([2.09836065573770281, 2.3046638387921279, 1.0]),
         from_primitive([8.0, 0.0, 0.1]), (0, 1), 0.5, 0.5, "roe"),
        (ModifiedShallowWater(), [1.0, 1.0], [1.8, 0.530039370688997], (-0.5, 0.5), 0.0, 0.15,
         "roe"),
    ]
    for system, uL, uR, dom, x0, t_end, base in cases:
        grid = Grid1D.from_bounds(*dom, 100)
        f = init_from_riemann(grid, uL, uR, x0, system)
        cb, worst = _exact_tracker(system, np.asarray(uL, float), np.asarray(uR, float), x0, grid)
        run(f, SchemeConfig.from_name(name, base=base), system, t_end, callback=cb)
        assert worst[0] <= 1e-12, (system, worst[0])


def _first_order_reference(U, system, dt, dx):
    # plain path-conservative Roe update on transmissive data
    P = np.vstack([U[:1], U, U[-1:]])
    new = U.copy()
    for j in range(len(U)):
        for a, b, sgn in ((P[j], P[j + 1], +1), (P[j + 1], P[j + 2], -1)):
            A = system.roe_matrix(a, b)
            lam, R = np.linalg.eig(A)
            lam, R = lam.real, R.real
            alpha = np.linalg.solve(R, b - a)
            part = np.maximum(lam, 0) if sgn > 0 else np.minimum(lam, 0)
            new[j] -= dt / dx * (R @ (part * alpha))
    return new


@pytest.mark.parametrize("system,uL,uR", [
    (CoupledBurgers(), [2.0, 1.0], [0.5, 1.5]),
    (ModifiedShallowWater(), [1.0, 1.0], [1.5, 0.1855893974385]),
    (LagrangianGas(), [1.0, 0.5, 2.5], [2.0, 0.0, 1.0]),
])
def test_first_order_reduces_to_plain_scheme(system, uL, uR):
    grid = Grid1D.from_bounds(0, 1, 20)
    f = init_from_riemann(grid, uL, uR, 0.43)
    new, rep = step(f, SchemeConfig(order=1, disrec=False), system)
    ref = _first_order_reference(f.averages, system, rep.dt, grid.dx)
    np.testing.assert_allclose(new.averages, ref, rtol=1e-13, atol=1e-13)


@pytest.mark.parametrize("name", ROE_VARIANTS)
@pytest.mark.parametrize("base", ["roe", "godunov"])
def test_periodic_conservation(name, base):
    grid = Grid1D.from_bounds(0, 1, 100)
    f = init_from_function(grid, initial_function("burgers.smooth"), ghost_policy="periodic")
    system = CoupledBurgers()
    mass0 = f.averages.sum()
    steps = [0]

    def cb(field, rep):
        steps[0] += 1
    out = run(f, SchemeConfig.from_name(name, base=base), system, 0.3, callback=cb)
    mass = out[-1][1].averages.sum()
    assert abs(mass - mass0) <= 1e-12 * abs(mass0) * max(1, steps[0] / 1000)


@pytest.mark.parametrize("name", ROE_VARIANTS + ("O1_ExactDisRec", "O2_ExactDisRec"))
def test_conserved_functional_with_unreached_boundary(name):
    grid = Grid1D.from_bounds(-0.5, 0.5, 200)
    system = ModifiedShallowWater()
    f = init_from_riemann(grid, [1.0, 1.0], [1.5, 0.1855893974385], 0.0, system)
    t = 0.1
    out = run(f, SchemeConfig.from_name(name), system, t)
    h0, h1 = f.averages[:, 0].sum(), out[-1][1].averages[:, 0].sum()
    # the boundary states are untouched, so the mass balance is their q
    inflow = t * (1.0 - 0.1855893974385) / grid.dx
    assert abs(h1 - h0 - inflow) <= 1e-12 * h0


def test_run_lands_on_snapshots_in_order():
    grid = Grid1D.from_bounds(0, 1, 50)
    system = CoupledBurgers()
    f = init_from_riemann(grid, [2.0, 1.0], [0.5, 0.5], 0.3)
    out = run(f, SchemeConfig(), system, 0.1, snapshot_times=(0.07, 0.02, 0.5))
    assert [t for t, _ in out] == [0.02, 0.07, 0.1]
    assert [fld.time for _, fld in out] == [0.02, 0.07, 0.1]
    same = run(f, SchemeConfig(), system, 0.0)
    assert len(same) == 1 and same[0][1] is f


def test_max_steps_guard():
    grid = Grid1D.from_bounds(0, 1, 50)
    f = init_from_riemann(grid, [2.0, 1.0], [0.5, 0.5], 0.3)
    with pytest.raises(MaxStepsExceeded):
        run(f, SchemeConfig(max_steps=3), CoupledBurgers(), 1.0)


def test_domain_exit_is_reported():
    # first-order Roe on the wide shallow-water problem loses q > 0 early
    grid = Grid1D.from_bounds(-0.5, 0.5, 1000)
    system = ModifiedShallowWater()
    f = init_from_riemann(grid, [1.0, 1.0], [5.0, 2.86423084288], 0.0, system)
    with pytest.raises(DomainError):
        run(f, SchemeConfig(), system, 0.06)
