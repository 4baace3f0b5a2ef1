import numpy as np
import pytest

from transport_forwarding import (
    Arctan,
    Grid,
    Linear,
    Params,
    Quadrature,
    Saturation,
    build_gain,
)


@pytest.fixture(scope="session")
def params_unit():
    return Params(a=1.0, lam=1.0, gamma=1.0, mu=1.0)


@pytest.fixture(scope="session")
def grid200():
    return Grid(200)


@pytest.fixture(scope="session")
def quad200(grid200):
    return Quadrature(grid200)


@pytest.fixture(scope="session")
def gain200(params_unit, grid200):
    return build_gain(params_unit, grid200)


@pytest.fixture(scope="session")
def sigma_catalog():
    return (
        Linear(rho=1.0),
        Saturation(rho=1.0, s1=-1.0, s2=1.0),
        Arctan(theta=1.0, rho=1.0),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)
