import numpy as np
import pytest

from cpkit.bases import gellmann_basis, rotated_basis, standard_basis

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)

# transposition superoperator for N = 2; also its Choi matrix
MATRIX_PHI = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)
# |Phi><Phi| with |Phi> = |00> + |11>
MATRIX_X = np.array(
    [[1, 0, 0, 1], [0, 0, 0, 0], [0, 0, 0, 0], [1, 0, 0, 1]], dtype=complex
)
# sum_a F_a^* (x) F_a^T over the Pauli basis: the swap-like projector 2|Psi><Psi|
MATRIX_DPJ = np.array(
    [[1, 0, 0, 1], [0, 0, 0, 0], [0, 0, 0, 0], [1, 0, 0, 1]], dtype=complex
)


def random_matrix(rng, n, m=None):
    m = n if m is None else m
    return rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))


def random_hermitian(rng, n):
    a = random_matrix(rng, n)
    return (a + a.conj().T) / 2


def random_unitary(rng, n):
    q, r = np.linalg.qr(random_matrix(rng, n))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state(rng, n):
    a = random_matrix(rng, n)
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_basis(rng, n):
    return rotated_basis(gellmann_basis(n), random_unitary(rng, n * n))


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)


@pytest.fixture
def pauli():
    return gellmann_basis(2)


@pytest.fixture
def std2():
    return standard_basis(2)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
