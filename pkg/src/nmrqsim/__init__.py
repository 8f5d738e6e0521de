"""nmrqsim: NMR spin-system Hamiltonians diagonalized on a statevector simulator.

Qubit ``k`` hosts nucleus ``k`` and is the ``k``-th Kronecker factor from the
left, i.e. the most significant bit of a basis index. Energies are in rad/s.
"""
__version__ = "0.1.0"

from .errors import (CannotCompleteError, ConvergenceError, DegenerateInputError,
                     InconsistencyError, InvalidInputError, NmrqError, ResourceLimitError,
                     SpecParseError)
from .exact_diag import EigenDecomposition, determinant, eigen_decompose, verify_eigenvalue
from .pauli import PauliString, PauliSum, multiply
from .spin_system import SpinSystemSpec, build_hamiltonian, load_spec, parse_spec

__all__ = [
    "__version__", "PauliString", "PauliSum", "multiply", "SpinSystemSpec",
    "build_hamiltonian", "load_spec", "parse_spec", "EigenDecomposition", "eigen_decompose",
    "determinant", "verify_eigenvalue", "NmrqError", "InvalidInputError", "DegenerateInputError",
    "SpecParseError", "ResourceLimitError", "CannotCompleteError", "InconsistencyError",
    "ConvergenceError",
]
