"""Shared fixtures; the expensive solves run once per session."""

import numpy as np
import pytest

import beclab as bl
from beclab.manybody import build_mode_basis, gp_limit_sweep


@pytest.fixture(scope="session")
def trap():
    return bl.TrapSpec.harmonic((1.0, 1.0, 1.0))


@pytest.fixture(scope="session")
def grid48():
    return bl.Grid.centered((14.0,) * 3, (48,) * 3)


@pytest.fixture(scope="session")
def grid96():
    return bl.Grid.centered((14.0,) * 3, (96,) * 3)


@pytest.fixture(scope="session")
def gp_g0_96(trap, grid96):
    return bl.minimize_gp(trap, 0.0, grid96)


@pytest.fixture(scope="session")
def gp_g10_96(trap, grid96):
    return bl.minimize_gp(trap, 10.0, grid96)


@pytest.fixture(scope="session")
def basis_q3(trap, grid48):
    return build_mode_basis(trap, grid48, 3)


@pytest.fixture(scope="session")
def analytic_ground_state(trap, grid48):
    """The exact zero-coupling minimizer, sampled: a clean metrics reference."""
    mesh = grid48.meshgrid()
    phi = np.ones(grid48.shape)
    for x in mesh:
        phi = phi * np.exp(-x**2 / 2.0)
    phi /= np.sqrt(grid48.integrate(phi**2))
    return bl.GPState(phi=phi, grid=grid48, trap=trap, g=0.0,
                      energy_total=3.0, energy_kinetic=1.5, energy_potential=1.5,
                      energy_interaction=0.0, mu=3.0, residual=0.0, iterations=0,
                      energy_trace=(3.0,), boundary_ratio=0.0)


SWEEP_POTENTIAL = bl.PairPotential.soft_sphere(0.01, 8.853088605086427)


@pytest.fixture(scope="session")
def default_sweep(trap, grid48, grid96):
    return gp_limit_sweep(trap, SWEEP_POTENTIAL, g=0.4, N_list=[2, 3, 4, 5, 6],
                          max_quanta=3, grid=grid48, gp_grid=grid96)
