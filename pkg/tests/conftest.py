import numpy as np
import pytest

from hypwave.geometry import Dimension, RadialGrid
from hypwave.propagator import make_plan


@pytest.fixture(scope="session")
def rg3():
    return RadialGrid(Dimension(3), 20.0, 512)


@pytest.fixture(scope="session")
def plan3(rg3):
    return make_plan(rg3)


def rel_l2(a, b):
    rg = a.grid
    num = np.sum(np.abs(a.values - b.values) ** 2 * rg.volume_weights)
    den = np.sum(np.abs(a.values) ** 2 * rg.volume_weights)
    return float(np.sqrt(num / den))
