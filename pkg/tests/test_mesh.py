import numpy as np
import pytest

from ncfv.errors import DomainError, ZeroWaveSpeed
from ncfv.mesh import (CellField, Grid1D, apply_ghost, cell_average, compute_dt,
                       init_from_function, init_from_riemann)
from ncfv.models import CoupledBurgers, ModifiedShallowWater
from ncfv.recon import DisRec, MarkSet


def test_grid_geometry():
    g = Grid1D.from_bounds(-0.5, 0.5, 10)
    assert g.dx == pytest.approx(0.1)
    np.testing.assert_allclose(g.edges, np.linspace(-0.5, 0.5, 11), atol=1e-15)
    np.testing.assert_allclose(g.centers, np.linspace(-0.45, 0.45, 10), atol=1e-15)
    assert g.interface(3) == pytest.approx(-0.2)
    with pytest.raises(ValueError):
        Grid1D(0.0, -1.0, 4)


def test_riemann_init_splits_the_cut_cell():
    g = Grid1D.from_bounds(0.0, 1.0, 10)
    f = init_from_riemann(g, [2.0, 0.0], [1.0, 0.0], 0.53)
    u = f.averages[:, 0]
    np.testing.assert_allclose(u[:5], 2.0)
    np.testing.assert_allclose(u[6:], 1.0)
    assert u[5] == pytest.approx(0.3 * 2.0 + 0.7 * 1.0)
    # total mass is the exact integral
    assert g.dx * u.sum() == pytest.approx(0.53 * 2.0 + 0.47 * 1.0)


def test_riemann_init_checks_domain():
    g = Grid1D.from_bounds(0.0, 1.0, 10)
    with pytest.raises(DomainError):
        init_from_riemann(g, [1.0, -2.0], [1.0, 1.0], 0.5, CoupledBurgers())
    with pytest.raises(DomainError):
        init_from_riemann(g, [1.0, 1.0], [1.0, 1.0], 1.5)


def test_ghost_policies():
    g = Grid1D.from_bounds(0.0, 1.0, 5)
    U = np.arange(5.0)[:, None]
    f = CellField.from_averages(g, U)
    np.testing.assert_array_equal(f.data[:2, 0], [0.0, 0.0])
    np.testing.assert_array_equal(f.data[-2:, 0], [4.0, 4.0])
    p = CellField.from_averages(g, U, ghost_policy="periodic")
    np.testing.assert_array_equal(p.data[:2, 0], [3.0, 4.0])
    np.testing.assert_array_equal(p.data[-2:, 0], [0.0, 1.0])
    assert apply_ghost(p).data.tobytes() == p.data.tobytes()


def test_function_init_and_gauss_average():
    g = Grid1D.from_bounds(0.0, 1.0, 8)
    f = init_from_function(g, lambda x: np.stack([x, 1.0 - x], -1))
    np.testing.assert_allclose(f.averages[:, 0], g.centers)
    # x^3 averages exactly with 4 Gauss nodes
    avg = cell_average(lambda x: (x ** 3)[..., None], g, 4)[:, 0]
    a, b = g.edges[:-1], g.edges[1:]
    np.testing.assert_allclose(avg, (b ** 4 - a ** 4) / (4 * g.dx), rtol=1e-13)
    with pytest.raises(DomainError):
        init_from_function(g, lambda x: np.stack([-x - 1, 0 * x], -1), CoupledBurgers())


def test_compute_dt_cfl_and_reconstruction_limit():
    g = Grid1D.from_bounds(0.0, 1.0, 10)
    f = CellField.from_averages(g, np.tile([1.0, 1.0], (10, 1)))
    b = compute_dt(f, CoupledBurgers(), cfl=0.5)
    assert b.dt_c == pytest.approx(0.5 * 0.1 / 2.0)
    marks = MarkSet({3: DisRec(0.25, 1.0, np.array([2.0, 0.0]), np.array([1.0, 0.0]))})
    b = compute_dt(f, CoupledBurgers(), marks, cfl=0.5)
    assert b.dt_r == pytest.approx(0.75 * 0.1 / 1.0)
    assert b.dt == pytest.approx(min(b.dt_c, b.dt_r))
    b = compute_dt(f, CoupledBurgers(), cfl=0.5, dt_max=1e-3)
    assert b.dt == 1e-3


def test_zero_wave_speed_needs_dt_max():
    g = Grid1D.from_bounds(0.0, 1.0, 10)
    f = CellField.from_averages(g, np.tile([1.0, -1.0], (10, 1)))

    class Still(CoupledBurgers):
        def max_speed(self, U):
            return 0.0

    with pytest.raises(ZeroWaveSpeed):
        compute_dt(f, Still())
    assert compute_dt(f, Still(), dt_max=0.01).dt == 0.01


def test_msw_domain_predicate():
    w = ModifiedShallowWater()
    assert w.in_domain(np.array([1.0, 1.0]))
    # published data beyond h < (16 q)^(1/3) stay admissible
    assert w.in_domain(np.array([1.5, 0.1855893974385]))
    assert not w.in_domain(np.array([0.0, 1.0]))
    assert not w.in_domain(np.array([1.0, -1.0]))
    assert not w.in_domain(np.array([np.nan, 1.0]))
