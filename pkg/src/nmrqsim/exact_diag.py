"""Dense Hermitian eigendecomposition and determinant-based eigenvalue checks.

This is the classical oracle the quantum routines are judged against. Real
symmetric input (every spin Hamiltonian built here) goes through cyclic
Jacobi rotations; complex Hermitian input falls back to LAPACK.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InvalidInputError
from .pauli import PauliSum

JACOBI_TOL = 1e-12
MAX_SWEEPS = 100


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray   # ascending, rad/s
    eigenvectors: np.ndarray  # column i belongs to eigenvalues[i]

    def __len__(self):
        return len(self.eigenvalues)

    def vector(self, i: int) -> np.ndarray:
        return self.eigenvectors[:, i]

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _as_matrix(h) -> np.ndarray:
    if isinstance(h, PauliSum):
        h = h.to_dense()
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {h.shape}")
    return h


def _check_hermitian(h: np.ndarray, rtol: float = 1e-10):
    scale = max(np.abs(h).max(initial=0.0), 1.0)
    if np.abs(h - h.conj().T).max(initial=0.0) > rtol * scale:
        raise InvalidInputError("matrix is not Hermitian")


def _fix_gauge(v: np.ndarray) -> np.ndarray:
    # make the largest-magnitude component of each column real and positive
    idx = np.argmax(np.abs(v), axis=0)
    pivots = v[idx, np.arange(v.shape[1])]
    return v * (np.abs(pivots) / pivots)


def eigen_decompose(h, method: str = "jacobi") -> EigenDecomposition:
    """Full spectrum of a Hermitian matrix (or PauliSum), sorted ascending.

    ``method`` is ``"jacobi"`` (default, own kernel) or ``"lapack"``. Complex
    Hermitian input always uses LAPACK since the Jacobi kernel is real-only.
    """
    h = _as_matrix(h)
    _check_hermitian(h)
    if method not in ("jacobi", "lapack"):
        raise InvalidInputError(f"unknown method {method!r}")
    scale = max(np.abs(h).max(initial=0.0), 1.0)
    real = np.abs(h.imag).max(initial=0.0) <= 1e-14 * scale if np.iscomplexobj(h) else True
    if method == "jacobi" and real:
        a = np.ascontiguousarray(0.5 * (h.real + h.real.T), dtype=float)
        w, v, _ = _kernels.jacobi_eigh(a, JACOBI_TOL, MAX_SWEEPS)
    else:
        w, v = np.linalg.eigh(h)
    order = np.argsort(w, kind="stable")
    return EigenDecomposition(np.asarray(w)[order], _fix_gauge(np.asarray(v)[:, order]))


def determinant(h) -> complex:
    """Determinant by partial-pivot LU."""
    phase, logabs = _kernels.lu_logdet(np.ascontiguousarray(_as_matrix(h), dtype=complex))
    if logabs == -np.inf:
        return 0j
    return complex(phase * np.exp(logabs))


def verify_eigenvalue(h, lam: float, tol: float = 1e-6) -> bool:
    """True when ``det(H - lam I)`` is negligible relative to the matrix scale.

    The test is ``|det(H - lam I)| <= tol * ||H|| * prod(n-1 largest row norms
    of H - lam I)``, evaluated in log space. Dividing the determinant by the
    product of the ``n-1`` largest row norms bounds the smallest singular value
    from above, so this reads as "``H - lam I`` has a singular value below
    ``tol * ||H||``". The plain product of all row norms would let every
    ``lam`` pass on a diagonally dominant matrix.
    """
    h = _as_matrix(h).astype(complex)
    n = h.shape[0]
    shifted = h - lam * np.eye(n)
    phase, logdet = _kernels.lu_logdet(np.ascontiguousarray(shifted))
    if logdet == -np.inf:
        return True
    hnorm = np.linalg.norm(h, axis=1).max(initial=0.0)
    if hnorm == 0.0:
        return abs(lam) <= tol
    rows = np.sort(np.linalg.norm(shifted, axis=1))[1:]
    with np.errstate(divide="ignore"):
        log_scale = np.log(tol) + np.log(hnorm) + np.sum(np.log(rows))
    return bool(logdet <= log_scale)
