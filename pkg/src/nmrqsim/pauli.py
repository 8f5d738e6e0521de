"""Weighted Pauli strings and sums.

A Pauli string is stored as a text label such as ``"XZI"`` plus a complex
coefficient. Character ``k`` acts on qubit ``k``, which is the leftmost
Kronecker factor for ``k = 0`` and therefore the most significant bit of
the basis index. Every other module uses the same ordering.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import InvalidInputError, ResourceLimitError

AXES = "IXYZ"
DEFAULT_TOL = 1e-12
DENSE_QUBIT_CAP = 12

# (a, b) -> (phase, axis) with sigma_a sigma_b = phase * sigma_axis
_PRODUCT = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"), ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"), ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"), ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliString:
    """``coeff * sigma_{axes[0]} (x) sigma_{axes[1]} (x) ...``"""

    axes: str
    coeff: complex = 1.0

    def __post_init__(self):
        if not self.axes or any(c not in AXES for c in self.axes):
            raise InvalidInputError(f"invalid Pauli label {self.axes!r}")
        object.__setattr__(self, "coeff", complex(self.coeff))

    @property
    def n_qubits(self) -> int:
        return len(self.axes)

    @property
    def is_identity(self) -> bool:
        return set(self.axes) == {"I"}

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(k for k, c in enumerate(self.axes) if c != "I")

    def masks(self) -> tuple[int, int]:
        """Bit masks (x_mask, z_mask) of qubits carrying an X/Y and a Z/Y factor."""
        n = len(self.axes)
        xm = zm = 0
        for k, c in enumerate(self.axes):
            bit = 1 << (n - 1 - k)
            if c in "XY":
                xm |= bit
            if c in "ZY":
                zm |= bit
        return xm, zm

    def commutes_with(self, other: PauliString) -> bool:
        anti = sum(1 for a, b in zip(self.axes, other.axes) if a != "I" and b != "I" and a != b)
        return anti % 2 == 0

    def qubitwise_commutes_with(self, other: PauliString) -> bool:
        return all(a == "I" or b == "I" or a == b for a, b in zip(self.axes, other.axes))

    def scaled(self, factor: complex) -> PauliString:
        return PauliString(self.axes, self.coeff * factor)

    def __mul__(self, other):
        if isinstance(other, PauliString):
            return multiply(self, other)
        if isinstance(other, PauliSum):
            return PauliSum([self]) * other
        return self.scaled(other)

    def __rmul__(self, other):
        return self.scaled(other)

    def __neg__(self):
        return self.scaled(-1)

    def __str__(self):
        return f"{_fmt_coeff(self.coeff)} {self.axes}"


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Exact product ``a @ b`` with the accumulated phase folded into the coefficient."""
    if len(a.axes) != len(b.axes):
        raise InvalidInputError(f"length mismatch: {len(a.axes)} vs {len(b.axes)}")
    phase = 1 + 0j
    out = []
    for x, y in zip(a.axes, b.axes):
        ph, c = _PRODUCT[x, y]
        phase *= ph
        out.append(c)
    return PauliString("".join(out), a.coeff * b.coeff * phase)


class PauliSum:
    """A linear combination of Pauli strings on a fixed number of qubits.

    Construction does not merge duplicates; call :meth:`canonicalize` for that.
    Term order is preserved (first occurrence wins on merge), which fixes the
    Trotter ordering downstream.
    """

    __slots__ = ("terms", "n_qubits")

    def __init__(self, terms: Iterable[PauliString] = (), n_qubits: int | None = None):
        terms = tuple(terms)
        if n_qubits is None:
            if not terms:
                raise InvalidInputError("n_qubits is required for an empty sum")
            n_qubits = terms[0].n_qubits
        for t in terms:
            if t.n_qubits != n_qubits:
                raise InvalidInputError(
                    f"term {t.axes!r} has {t.n_qubits} qubits, expected {n_qubits}"
                )
        self.terms = terms
        self.n_qubits = int(n_qubits)

    @classmethod
    def from_dict(cls, coeffs: Mapping[str, complex], n_qubits: int | None = None) -> PauliSum:
        return cls([PauliString(k, v) for k, v in coeffs.items()], n_qubits)

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> PauliSum:
        return cls([PauliString("I" * n_qubits, coeff)], n_qubits)

    @classmethod
    def from_dense(cls, matrix: np.ndarray, tol: float = DEFAULT_TOL) -> PauliSum:
        """Pauli decomposition ``c_P = tr(P M) / 2**n`` of a dense matrix."""
        matrix = np.asarray(matrix, dtype=complex)
        dim = matrix.shape[0]
        n = dim.bit_length() - 1
        if matrix.shape != (dim, dim) or 1 << n != dim:
            raise InvalidInputError("matrix must be square with power-of-two size")
        if n > DENSE_QUBIT_CAP:
            raise ResourceLimitError(f"{n} qubits exceeds dense cap {DENSE_QUBIT_CAP}")
        idx = np.arange(dim)
        terms = []
        for code in range(4 ** n):
            label = "".join(AXES[(code >> (2 * (n - 1 - k))) & 3] for k in range(n))
            p = PauliString(label)
            xm, zm = p.masks()
            # P[y ^ xm, y] = phase(y), so tr(P M) = sum_y phase(y) M[y, y ^ xm]
            c = np.sum(_string_phase(p, idx, zm) * matrix[idx, idx ^ xm]) / dim
            if abs(c) > tol:
                terms.append(PauliString(label, c))
        return canonical_order(cls(terms, n).canonicalize(tol))

    def __iter__(self) -> Iterator[PauliString]:
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self):
        return f"PauliSum({list(self.terms)!r}, n_qubits={self.n_qubits})"

    def __str__(self):
        if not self.terms:
            return "0"
        return "\n".join(str(t) for t in self.terms)

    def labels(self) -> list[str]:
        return [t.axes for t in self.terms]

    def coefficient(self, axes: str) -> complex:
        return sum((t.coeff for t in self.terms if t.axes == axes), 0j)

    def as_dict(self) -> dict[str, complex]:
        out: dict[str, complex] = {}
        for t in self.terms:
            out[t.axes] = out.get(t.axes, 0j) + t.coeff
        return out

    def __eq__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return (self.n_qubits == other.n_qubits
                and self.canonicalize().as_dict() == other.canonicalize().as_dict())

    def __add__(self, other):
        if isinstance(other, PauliString):
            other = PauliSum([other])
        if isinstance(other, PauliSum):
            _check_same_size(self, other)
            return PauliSum(self.terms + other.terms, self.n_qubits)
        if np.isscalar(other):
            return self + PauliSum.identity(self.n_qubits, other)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-1) * other

    def __rsub__(self, other):
        return (-1) * self + other

    def __mul__(self, other):
        if isinstance(other, PauliString):
            other = PauliSum([other])
        if isinstance(other, PauliSum):
            _check_same_size(self, other)
            prods = [multiply(a, b) for a in self.terms for b in other.terms]
            return PauliSum(prods, self.n_qubits).canonicalize()
        if np.isscalar(other):
            return PauliSum([t.scaled(other) for t in self.terms], self.n_qubits)
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        return self * (1.0 / other)

    def canonicalize(self, tol: float = DEFAULT_TOL) -> PauliSum:
        return canonicalize(self, tol)

    def is_hermitian(self, tol: float = DEFAULT_TOL) -> bool:
        return all(abs(c.imag) <= tol * max(1.0, abs(c))
                   for c in self.canonicalize(tol).as_dict().values())

    def real_coefficients(self) -> np.ndarray:
        return np.array([t.coeff.real for t in self.terms])

    def to_dense(self, cap: int = DENSE_QUBIT_CAP) -> np.ndarray:
        return to_dense(self, cap)

    def trace(self) -> float:
        return trace(self)

    def apply(self, state: np.ndarray) -> np.ndarray:
        """``H @ state`` without densifying the operator."""
        state = np.asarray(state, dtype=complex)
        if state.shape[-1] != 1 << self.n_qubits:
            raise InvalidInputError("state size does not match operator")
        idx = np.arange(1 << self.n_qubits)
        out = np.zeros_like(state)
        for t in self.terms:
            xm, zm = t.masks()
            # P|x> = phase(x) |x ^ xm>  =>  (P psi)[y] = phase(y ^ xm) psi[y ^ xm]
            src = idx ^ xm
            out += t.coeff * _string_phase(t, src, zm) * state[..., src]
        return out

    def commutator(self, other: PauliSum) -> PauliSum:
        return commutator(self, other)


def _check_same_size(a: PauliSum, b: PauliSum):
    if a.n_qubits != b.n_qubits:
        raise InvalidInputError(f"qubit count mismatch: {a.n_qubits} vs {b.n_qubits}")


def _fmt_coeff(c: complex) -> str:
    if abs(c.imag) < 1e-15:
        return f"{c.real:+.10g}"
    return f"({c.real:+.10g}{c.imag:+.10g}j)"


def _popcount(a: np.ndarray) -> np.ndarray:
    a = a.astype(np.int64)
    count = np.zeros_like(a)
    while np.any(a):
        count += a & 1
        a = a >> 1
    return count


def _string_phase(p: PauliString, idx: np.ndarray, zm: int) -> np.ndarray:
    """Phase of ``P|x> = phase(x) |x ^ xmask>`` for an array of basis indices."""
    n_y = p.axes.count("Y")
    sign = 1 - 2 * (_popcount(idx & zm) & 1)
    return (1j ** n_y) * sign


def canonicalize(s: PauliSum, tol: float = DEFAULT_TOL) -> PauliSum:
    """Merge duplicate labels (first occurrence keeps its position) and drop |c| <= tol."""
    merged: dict[str, complex] = {}
    for t in s.terms:
        merged[t.axes] = merged.get(t.axes, 0j) + t.coeff
    return PauliSum([PauliString(k, v) for k, v in merged.items() if abs(v) > tol], s.n_qubits)


def _order_key(p: PauliString):
    support = p.support
    return (len(support), support, p.axes)


def canonical_order(s: PauliSum) -> PauliSum:
    """Merge duplicates and sort terms: identity, single-qubit by qubit, then pairs.

    For a spin Hamiltonian this yields ``ZI.., IZ.., XX, YY, ZZ`` per pair in
    ascending qubit order, the ordering used for Trotter steps.
    """
    merged = canonicalize(s)
    return PauliSum(sorted(merged.terms, key=_order_key), s.n_qubits)


def to_dense(s: PauliSum, cap: int = DENSE_QUBIT_CAP) -> np.ndarray:
    """Dense ``2**n x 2**n`` realization of ``sum_k c_k P_k``."""
    n = s.n_qubits
    if n > cap:
        raise ResourceLimitError(f"{n} qubits exceeds dense cap {cap}")
    dim = 1 << n
    idx = np.arange(dim)
    out = np.zeros((dim, dim), dtype=complex)
    for t in s.terms:
        xm, zm = t.masks()
        out[idx ^ xm, idx] += t.coeff * _string_phase(t, idx, zm)
    return out


def trace(s: PauliSum) -> float:
    """``tr(H) = 2**n * c_identity``; only the all-I term contributes."""
    c = s.coefficient("I" * s.n_qubits)
    return float((2 ** s.n_qubits) * c.real)


def _require_hermitian(s: PauliSum):
    if not s.is_hermitian():
        raise InvalidInputError("operator must be Hermitian (real coefficients)")


def trace_of_square(s: PauliSum) -> float:
    """``tr(H^2) = 2**n * sum c_k^2`` by trace-orthogonality of Pauli strings."""
    _require_hermitian(s)
    c = canonicalize(s).real_coefficients()
    return float((2 ** s.n_qubits) * np.sum(c * c))


def eigen_range_bounds(s: PauliSum) -> tuple[float, float]:
    """Trace-based bracket ``m -/+ sigma * sqrt(2**n - 1)`` on the spectrum.

    ``m`` and ``sigma**2`` are the mean and variance of the eigenvalues, both
    available from ``tr(H)`` and ``tr(H^2)``. The bracket holds for any
    Hermitian matrix because a single eigenvalue can deviate from the mean by
    at most ``sigma * sqrt(N - 1)``.
    """
    dim = 2 ** s.n_qubits
    m = trace(s) / dim
    var = max(trace_of_square(s) / dim - m * m, 0.0)
    half = np.sqrt(var) * np.sqrt(dim - 1)
    return m - half, m + half


def square_shifted(s: PauliSum, w: float) -> PauliSum:
    """Canonical Pauli sum of ``(H - w I)^2`` by term-by-term multiplication."""
    _require_hermitian(s)
    shifted = canonicalize(s - w)
    return canonicalize(shifted * shifted)


def commutator(a: PauliSum, b: PauliSum) -> PauliSum:
    """``[a, b] = ab - ba``; only anticommuting string pairs survive."""
    _check_same_size(a, b)
    terms = []
    for x in a.terms:
        for y in b.terms:
            if not x.commutes_with(y):
                terms.append(multiply(x, y).scaled(2))
    return canonicalize(PauliSum(terms, a.n_qubits))


def frobenius_norm(s: PauliSum) -> float:
    """``||sum c_k P_k||_F = sqrt(2**n * sum |c_k|^2)`` for a canonical sum."""
    c = np.array([t.coeff for t in canonicalize(s).terms])
    return float(np.sqrt((2 ** s.n_qubits) * np.sum(np.abs(c) ** 2)))


def trotter_error_bound(s: PauliSum, t: float, r: int) -> float:
    """First-order Trotter error bound ``t^2/(2r) * sum_j ||sum_{k>j} [H_k, H_j]||_F``.

    Terms are taken in :func:`canonical_order`, which is also the order the
    Trotter circuit applies them.
    """
    if r < 1:
        raise InvalidInputError("Trotter number must be >= 1")
    terms = [PauliSum([p], s.n_qubits) for p in canonical_order(s).terms]
    total = 0.0
    for j, hj in enumerate(terms):
        acc = PauliSum([], s.n_qubits)
        for hk in terms[j + 1:]:
            acc = acc + commutator(hk, hj)
        total += frobenius_norm(acc)
    return t * t / (2 * r) * total
