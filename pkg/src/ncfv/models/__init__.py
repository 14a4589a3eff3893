"""Concrete hyperbolic systems."""

from .burgers import CoupledBurgers, cb_exact_riemann, cb_strategy, cb_viscous_connect
from .gas import LagrangianGas, from_primitive, gd_exact_riemann, gd_strategy, to_primitive
from .msw import (ModifiedShallowWater, msw_classify, msw_exact_riemann, msw_shock_speed,
                  msw_strategy_roe, msw_wave_curves)

__all__ = [
    "CoupledBurgers", "cb_exact_riemann", "cb_strategy", "cb_viscous_connect",
    "LagrangianGas", "from_primitive", "to_primitive", "gd_exact_riemann", "gd_strategy",
    "ModifiedShallowWater", "msw_classify", "msw_exact_riemann", "msw_shock_speed",
    "msw_strategy_roe", "msw_wave_curves",
]


def make_system(name, **options):
    """System instance from its short id (``burgers``, ``gas``, ``msw``)."""
    if name == "burgers":
        return CoupledBurgers(options.get("path", "segments"))
    if name == "gas":
        return LagrangianGas(options.get("gamma", 1.4))
    if name == "msw":
        return ModifiedShallowWater()
    raise ValueError(f"unknown system {name!r}")
