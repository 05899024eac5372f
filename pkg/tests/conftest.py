import numpy as np
import pytest

from fracvolterra.grid import SampledPath, TimeGrid


@pytest.fixture
def unit_grid():
    return TimeGrid(1.0, 256)


def sampled(T, n, func):
    grid = TimeGrid(T, n)
    return SampledPath.from_function(grid, func)


@pytest.fixture
def make_path():
    return sampled


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240611)
