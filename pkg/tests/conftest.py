import numpy as np
import pytest

from sabine_lab.geometry import BoundaryCurve


@pytest.fixture(scope="session")
def unit_circle():
    return BoundaryCurve.circle(1.0)


@pytest.fixture(scope="session")
def ellipse21():
    return BoundaryCurve.ellipse(2.0, 1.0)


@pytest.fixture(scope="session")
def stadium11():
    return BoundaryCurve.stadium(1.0, 1.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260809)
