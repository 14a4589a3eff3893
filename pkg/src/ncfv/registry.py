"""Built-in test cases: initial data, grids, end times and plotted variants."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .models.gas import from_primitive
from .models.msw import msw_shock_state

__all__ = ["TestCase", "TESTS", "FUNCTIONS", "get_test", "list_tests", "initial_function"]

ROE_VARIANTS = ("O1_noDisRec", "O2_noDisRec", "O1_DisRec", "O2_DisRec")
ALL_VARIANTS = ROE_VARIANTS + ("O1_ExactDisRec", "O2_ExactDisRec")


@dataclass(frozen=True)
class TestCase:
    """One reproducible experiment.

    Attributes
    ----------
    kind : {'riemann', 'function'}
        Riemann data ``(left, right, x0)`` or a named builtin function.
    cells : tuple of int
        Grids on which every variant is run; the first is the default.
    refine : tuple of int
        Grids of an additional refinement study of ``refine_variant``.
    """

    id: str
    title: str
    system: str
    system_options: dict
    kind: str
    domain: tuple
    cells: tuple
    t_end: float
    variants: tuple
    base: str = "roe"
    cfl: float = 0.5
    left: Optional[tuple] = None
    right: Optional[tuple] = None
    x0: float = 0.0
    function: Optional[str] = None
    boundary: str = "transmissive"
    snapshots: tuple = ()
    refine: tuple = ()
    refine_variant: Optional[str] = None
    reference_cells: Optional[int] = None
    published_middle: Optional[tuple] = None
    supplementary: bool = False
    checks: tuple = field(default=())


def _stationary(x):
    return np.stack([np.sin(x), 1.0 - np.sin(x)], -1)


def _perturbed(x):
    u = np.sin(x) + 0.2 * np.exp(-2000.0 * (x - 0.5) ** 2)
    return np.stack([u, 1.0 - np.sin(x)], -1)


def _smooth_periodic(x):
    w = 0.5 + 0.25 * np.sin(2.0 * np.pi * x)
    return np.stack([w, 0.5 * w + 0.25], -1)


FUNCTIONS = {
    "burgers.stationary": _stationary,
    "burgers.perturbed": _perturbed,
    "burgers.smooth": _smooth_periodic,
}


def initial_function(name):
    try:
        return FUNCTIONS[name]
    except KeyError:
        raise KeyError(f"unknown builtin function {name!r}") from None


def _gas(w):
    return tuple(from_primitive(np.array(w, dtype=float), 1.4).tolist())


_MSW_SS_MID = msw_shock_state(np.array([1.0, 3.0]), 1.5, 1)
_MSW_SS_RIGHT = msw_shock_state(_MSW_SS_MID, 1.2, 2)

_VISCOUS = {"path": "viscous"}

TESTS = {t.id: t for t in [
    TestCase("burgers.test1", "Coupled Burgers, segment paths, single shock",
             "burgers", {"path": "segments"}, "riemann", (0.0, 1.0), (1000,), 0.1,
             ROE_VARIANTS, base="roe", left=(2.0, 2.0), right=(1.0, 1.0), x0=0.5,
             checks=("segment-path",)),
    TestCase("burgers.test2", "Coupled Burgers, viscous paths, isolated shock",
             "burgers", _VISCOUS, "riemann", (0.0, 1.0), (100, 1000), 0.03,
             ROE_VARIANTS, base="godunov", left=(7.99, 11.01), right=(0.25, 0.75), x0=0.5,
             checks=("isolated-shock", "wrong-limit")),
    TestCase("burgers.test3", "Coupled Burgers, stationary contact and shock",
             "burgers", _VISCOUS, "riemann", (0.0, 1.0), (1000,), 0.05,
             ROE_VARIANTS, base="godunov", left=(5.0, 1.0), right=(1.0, 2.0), x0=0.5),
    TestCase("burgers.test4", "Coupled Burgers, stationary contact and rarefaction",
             "burgers", _VISCOUS, "riemann", (0.0, 1.0), (1000,), 0.05,
             ROE_VARIANTS, base="godunov", left=(1.0, 2.0), right=(5.0, 1.0), x0=0.5),
    TestCase("burgers.test5", "Coupled Burgers, stationary solution",
             "burgers", _VISCOUS, "function", (0.0, 1.0), (1000,), 1.0,
             ("O1_DisRec", "O2_DisRec"), base="godunov", function="burgers.stationary",
             checks=("well-balanced",)),
    TestCase("burgers.test6", "Coupled Burgers, perturbed stationary solution",
             "burgers", _VISCOUS, "function", (0.0, 1.0), (1000,), 1.0,
             ROE_VARIANTS, base="godunov", function="burgers.perturbed",
             snapshots=(0.2,), reference_cells=10000),
    TestCase("gas.test1", "Lagrangian gas dynamics, isolated shock",
             "gas", {"gamma": 1.4}, "riemann", (0.0, 1.0), (300,), 0.5, ROE_VARIANTS,
             left=_gas((2.09836065573770281, 2.3046638387921279, 1.0)),
             right=_gas((8.0, 0.0, 0.1)), x0=0.5, checks=("isolated-shock",)),
    TestCase("gas.test2", "Lagrangian gas dynamics, shock, contact and shock",
             "gas", {"gamma": 1.4}, "riemann", (0.0, 1.0), (300,), 0.5, ROE_VARIANTS,
             left=_gas((5.0, 3.323013993227, 0.481481481481)),
             right=_gas((8.0, 0.0, 0.1)), x0=0.5, checks=("gas-three-wave",)),
    TestCase("gas.test3", "Lagrangian gas dynamics, rarefaction, contact and shock",
             "gas", {"gamma": 1.4}, "riemann", (0.0, 1.0), (300,), 0.5, ROE_VARIANTS,
             left=_gas((2.09836065573770281, 3.323013993227, 1.0)),
             right=_gas((8.0, 4.0, 0.1)), x0=0.5),
    TestCase("msw.test1", "Modified shallow water, isolated 1-shock",
             "msw", {}, "riemann", (-0.5, 0.5), (1000,), 0.15, ALL_VARIANTS,
             left=(1.0, 1.0), right=(1.8, 0.530039370688997), x0=0.0,
             checks=("isolated-shock",)),
    TestCase("msw.test2", "Modified shallow water, shocks of opposite speeds",
             "msw", {}, "riemann", (-0.5, 0.5), (1000,), 0.15, ALL_VARIANTS,
             left=(1.0, 1.0), right=(1.5, 0.1855893974385), x0=0.0,
             refine=(1000, 2000, 4000), refine_variant="O1_DisRec",
             published_middle=(1.8, 0.530039370688997), checks=("msw-exact", "msw-refine")),
    TestCase("msw.test3", "Modified shallow water, shocks of equal sign speeds",
             "msw", {}, "riemann", (-0.5, 0.5), (1000,), 0.06, ALL_VARIANTS,
             left=(1.0, 1.0), right=(5.0, 2.86423084288), x0=0.0,
             published_middle=(1.5, 5.96906891076), checks=("msw-exact",)),
    TestCase("msw.same-sign", "Modified shallow water, consistent right-moving shock pair",
             "msw", {}, "riemann", (-0.5, 0.5), (1000,), 0.06, ALL_VARIANTS,
             left=(1.0, 3.0), right=tuple(_MSW_SS_RIGHT.tolist()), x0=-0.3,
             supplementary=True, checks=("msw-exact",)),
    TestCase("burgers.smooth", "Coupled Burgers, smooth periodic data before breaking",
             "burgers", {"path": "segments"}, "function", (0.0, 1.0), (100, 200, 400, 800),
             0.1, ("O1_noDisRec", "O2_noDisRec"), base="roe", function="burgers.smooth",
             boundary="periodic", supplementary=True, checks=("order",)),
]}


def get_test(test_id):
    try:
        return TESTS[test_id]
    except KeyError:
        raise KeyError(f"unknown test id {test_id!r}; see `ncfv list-tests`") from None


def list_tests(include_supplementary=True):
    return [t for t in TESTS.values() if include_supplementary or not t.supplementary]
