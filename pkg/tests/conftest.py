import numpy as np
import pytest
from hypothesis import settings

from nmrqsim.exact_diag import eigen_decompose
from nmrqsim.pauli import PauliString, PauliSum
from nmrqsim.spin_system import (build_hamiltonian, sulfanol_reference_hamiltonian,
                                 sulfanol_spec)

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

SINGLET = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
EVEN_BELL = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


@pytest.fixture(scope="session")
def spec():
    return sulfanol_spec()


@pytest.fixture(scope="session")
def ham(spec):
    return build_hamiltonian(spec)


@pytest.fixture(scope="session")
def ref_ham():
    return sulfanol_reference_hamiltonian()


@pytest.fixture(scope="session")
def oracle(ham):
    return eigen_decompose(ham, method="lapack")


def random_pauli_sum(rng, n, n_terms, hermitian=True, scale=1.0):
    terms = []
    for _ in range(n_terms):
        axes = "".join(rng.choice(list("IXYZ"), size=n))
        c = rng.normal() * scale
        if not hermitian:
            c = c + 1j * rng.normal() * scale
        terms.append(PauliString(axes, c))
    return PauliSum(terms, n).canonicalize()


def random_state(rng, n):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return v / np.linalg.norm(v)


# --- acceptance reporting ---------------------------------------------------
ACCEPTANCE_LINES: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
