import pytest

from vortexlab.fields import build_grid
from vortexlab.taubes import ZeroSet, solve_taubes


@pytest.fixture(scope="session")
def grid_coarse():
    return build_grid(129, 12.0)


@pytest.fixture(scope="session")
def sol_n1_coarse(grid_coarse):
    return solve_taubes(ZeroSet.of((0.0, 0.0)), grid_coarse, tol=1e-10)


@pytest.fixture(scope="session")
def sol_n2_coarse(grid_coarse):
    return solve_taubes(ZeroSet.of((-2.0, 0.0), (2.0, 0.0)), grid_coarse, tol=1e-10)


@pytest.fixture(scope="session")
def grid_fine():
    return build_grid(513, 12.0)


@pytest.fixture(scope="session")
def sol_n1_fine(grid_fine):
    return solve_taubes(ZeroSet.of((0.0, 0.0)), grid_fine, tol=1e-10)


@pytest.fixture(scope="session")
def sol_n2_fine(grid_fine):
    return solve_taubes(ZeroSet.of((-2.0, 0.0), (2.0, 0.0)), grid_fine, tol=1e-10)
