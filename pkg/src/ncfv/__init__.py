"""Path-conservative finite volume schemes with in-cell discontinuous
reconstruction for one-dimensional nonconservative hyperbolic systems."""

from .core import (FluctuationPair, PathFamily, SystemModel, WaveFan, eigen_decompose,
                   fan_cell_averages, generalized_rh_residual, godunov_fluctuations,
                   path_integral, roe_fluctuations)
from .mesh import CellField, Grid1D, compute_dt, init_from_function, init_from_riemann
from .models import CoupledBurgers, LagrangianGas, ModifiedShallowWater, make_system
from .stepper import SchemeConfig, run, step

__version__ = "0.1.0"
