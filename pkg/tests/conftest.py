import numpy as np
import pytest

from lfvqe import exact_ground_state, pion_hamiltonian


@pytest.fixture(scope="session")
def pion_operator():
    return pion_hamiltonian().operator


@pytest.fixture(scope="session")
def pion_matrix(pion_operator):
    return pion_operator.entries.real


@pytest.fixture(scope="session")
def pion_ground(pion_operator):
    """(lowest eigenvalue, unit eigenvector) from dense diagonalization."""
    return exact_ground_state(pion_operator)


def random_hermitian(rng, dim, real=False):
    m = rng.normal(size=(dim, dim))
    if not real:
        m = m + 1j * rng.normal(size=(dim, dim))
    return (m + m.conj().T) / 2


def random_state_vector(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)
