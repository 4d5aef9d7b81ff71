import numpy as np
import pytest

from ghzsim.topology import bundled_graph


@pytest.fixture(scope="session")
def ibmqx5():
    return bundled_graph("ibmqx5")


def random_density_matrix(n_qubits: int, rng: np.random.Generator) -> np.ndarray:
    """Random full-rank density matrix via a Wishart-style construction."""
    dim = 1 << n_qubits
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)
