import numpy as np
import pytest

from snls import Field, Grid
from snls.spectral import white_noise

TWO_PI = 2.0 * np.pi


@pytest.fixture
def grid1d():
    return Grid(dimension=1, points=64, length=TWO_PI)


@pytest.fixture
def grid1d_fine():
    return Grid(dimension=1, points=256, length=TWO_PI)


@pytest.fixture
def grid2d():
    return Grid(dimension=2, points=16, length=TWO_PI)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture
def random_field(grid1d, rng):
    return white_noise(grid1d, rng)


def random_fields(grid, count, seed=1234):
    gen = np.random.default_rng(seed)
    return [white_noise(grid, gen) for _ in range(count)]
