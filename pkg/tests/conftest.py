import numpy as np
import pytest

from ncfv.models import CoupledBurgers, LagrangianGas, ModifiedShallowWater
from ncfv.models.gas import from_primitive


def random_states(system, rng, k):
    """``k`` admissible states drawn away from the domain boundary."""
    if isinstance(system, CoupledBurgers):
        s = rng.uniform(0.2, 5.0, k)
        r = rng.uniform(-1.0, 2.0, k)
        return np.stack([r * s, (1 - r) * s], -1)
    if isinstance(system, LagrangianGas):
        w = np.stack([rng.uniform(0.5, 8.0, k), rng.uniform(-3.0, 3.0, k),
                      rng.uniform(0.1, 3.0, k)], -1)
        return from_primitive(w, system.gamma)
    q = rng.uniform(0.2, 3.0, k)
    h = rng.uniform(0.2, 0.95, k) * np.cbrt(16.0 * q)
    return np.stack([h, q], -1)


SYSTEMS = {
    "burgers-segments": lambda: CoupledBurgers("segments"),
    "burgers-viscous": lambda: CoupledBurgers("viscous"),
    "gas": lambda: LagrangianGas(1.4),
    "msw": lambda: ModifiedShallowWater(),
}


@pytest.fixture(params=sorted(SYSTEMS))
def system(request):
    return SYSTEMS[request.param]()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def oracle_integral(system, uL, uR, nodes=48, pieces=8):
    """Composite high-order Gauss-Legendre integral of A(phi) phi' along the path."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    total = np.zeros_like(np.asarray(uL, float))
    edges = np.linspace(0.0, 1.0, pieces + 1)
    for phi, dphi in system.path.legs(np.asarray(uL, float), np.asarray(uR, float)):
        for a, b in zip(edges[:-1], edges[1:]):
            s = a + 0.5 * (b - a) * (x + 1.0)
            vals = np.einsum("kij,kj->ki", system.matrix(phi(s)), dphi(s))
            total = total + 0.5 * (b - a) * (w @ vals)
    return total
