import numpy as np
import pytest

from geonets import Dumbbell, FlatTorus, Sphere


@pytest.fixture(scope="session")
def torus():
    return FlatTorus()


@pytest.fixture(scope="session")
def sphere():
    return Sphere()


@pytest.fixture(scope="session")
def dumbbell():
    return Dumbbell()


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
