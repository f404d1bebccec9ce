import numpy as np
import pytest

import beclab as bl
from beclab.manybody import build_mode_basis, ground_state, hartree_energy
from beclab.manybody.basis import FockBasis
from beclab.manybody.ground import PairOpHamiltonian, pair_moment
from beclab.manybody.tensor import interaction_tensor

from .oracles import dense_gamma, dense_ground

GRID = bl.Grid.centered((12.0,) * 3, (32,) * 3)
TRAP = bl.TrapSpec.harmonic((1.0, 1.0, 1.0))


@pytest.fixture(scope="module")
def basis_q1():
    return build_mode_basis(TRAP, GRID, 1)


@pytest.fixture(scope="module")
def basis_q2():
    return build_mode_basis(TRAP, GRID, 2)


@pytest.fixture(scope="module")
def soft_tensor_q2(basis_q2):
    return interaction_tensor(basis_q2, bl.PairPotential.soft_sphere(5.0, 1.1))


def test_two_noninteracting_bosons(basis_q2):
    t = interaction_tensor(basis_q2, bl.PairPotential.soft_sphere(0.0, 1.0))
    gr = ground_state(basis_q2, t, 2)
    assert gr.energy == pytest.approx(6.0, abs=1e-12)
    ref = np.zeros((basis_q2.size, basis_q2.size))
    ref[0, 0] = 2.0
    np.testing.assert_allclose(gr.gamma, ref, atol=1e-12)
    assert gr.condensate_fraction == pytest.approx(1.0, abs=1e-12)


def test_single_particle_no_pair_term(basis_q2, soft_tensor_q2):
    gr = ground_state(basis_q2, soft_tensor_q2, 1)
    assert gr.energy == pytest.approx(basis_q2.energies[0], abs=1e-10)


@pytest.mark.parametrize("N,quanta", [(2, 1), (2, 2), (3, 1), (4, 1)])
def test_dense_oracle_equivalence(N, quanta, basis_q1, basis_q2):
    basis = basis_q1 if quanta == 1 else basis_q2
    tensor = interaction_tensor(basis, bl.PairPotential.soft_sphere(5.0, 1.1))
    fock = FockBasis.build(N, basis.size)
    assert fock.size <= 500
    e_ref, x_ref, states, index = dense_ground(basis, tensor, N)
    gamma_ref = dense_gamma(x_ref, states, index, basis.size)
    gr = ground_state(basis, tensor, N)
    assert gr.energy == pytest.approx(e_ref, abs=1e-9)
    np.testing.assert_allclose(gr.gamma, gamma_ref, atol=1e-8)


def test_energy_below_random_rayleigh_quotients(basis_q2, soft_tensor_q2):
    gr = ground_state(basis_q2, soft_tensor_q2, 3)
    fock = FockBasis.build(3, basis_q2.size)
    ham = PairOpHamiltonian(basis_q2, soft_tensor_q2, fock)
    rng = np.random.default_rng(11)
    for _ in range(5):
        x = rng.standard_normal(fock.size)
        x /= np.linalg.norm(x)
        assert gr.energy <= ham.expectation(x) + 1e-10


def test_hartree_bound_and_pair_moment(basis_q2, soft_tensor_q2):
    N = 3
    gr = ground_state(basis_q2, soft_tensor_q2, N)
    c = np.zeros(basis_q2.size)
    c[0] = 1.0
    rq = hartree_energy(basis_q2, soft_tensor_q2, N, c)
    assert gr.energy <= rq + 1e-10
    fock = FockBasis.build(N, basis_q2.size)
    ham = PairOpHamiltonian(basis_q2, soft_tensor_q2, fock)
    pm = pair_moment(ham, gr.coefficients, c) / N**2
    overlap = float(c @ gr.gamma @ c) / N
    assert pm <= 1.0 + 1e-10
    assert pm >= overlap**2 - 2.0 / N - 1e-10


def test_natural_occupations_normalized(basis_q2, soft_tensor_q2):
    gr = ground_state(basis_q2, soft_tensor_q2, 4)
    occ = gr.natural_occupations
    assert np.all(occ >= -1e-10) and np.all(occ <= 1 + 1e-10)
    assert occ.sum() == pytest.approx(1.0, abs=1e-8)


def test_gamma_parity_block_structure(basis_q2, soft_tensor_q2):
    # isotropic trap and central potential: no mixing across axis parity
    gr = ground_state(basis_q2, soft_tensor_q2, 3)
    par = basis_q2.axis_parity
    for i in range(basis_q2.size):
        for j in range(basis_q2.size):
            if not np.array_equal(par[i], par[j]):
                assert abs(gr.gamma[i, j]) < 1e-8
