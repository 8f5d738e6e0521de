"""Statevector circuit simulator with sampling and stochastic Pauli noise.

Qubit 0 is the most significant bit of the basis index, matching the
Kronecker order used by :mod:`nmrqsim.pauli`. States are plain complex
numpy arrays of length ``2**n`` (or ``(batch, 2**n)`` where noted).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import InvalidInputError
from .pauli import PAULI_MATRICES, PauliString, PauliSum

NORM_TOL = 1e-10

ONE_QUBIT_KINDS = ("H", "X", "Y", "Z", "S", "SDag", "Rx", "Ry", "Rz", "Phase", "GPhase")
TWO_QUBIT_KINDS = ("CNOT", "CPhase")
ANGLE_KINDS = ("Rx", "Ry", "Rz", "Phase", "GPhase", "CPhase")
_SELF_INVERSE = ("H", "X", "Y", "Z", "CNOT")
_INVERSE_NAME = {"S": "SDag", "SDag": "S"}

_SQ2 = 1 / math.sqrt(2)
_FIXED = {
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "X": PAULI_MATRICES["X"],
    "Y": PAULI_MATRICES["Y"],
    "Z": PAULI_MATRICES["Z"],
    "S": np.diag([1, 1j]),
    "SDag": np.diag([1, -1j]),
}


@dataclass(frozen=True)
class Gate:
    """One gate. ``qubits`` is ``(q,)`` or ``(control, target)``.

    ``Y`` is the Pauli-Y gate. ``GPhase(a)`` multiplies by ``e^{ia}`` and is
    written on one qubit so that promoting it to a controlled gate is just a
    ``Phase`` on the control.
    """

    kind: str
    qubits: tuple[int, ...]
    angle: float = 0.0

    def __post_init__(self):
        qubits = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qubits)
        if self.kind in ONE_QUBIT_KINDS:
            arity = 1
        elif self.kind in TWO_QUBIT_KINDS:
            arity = 2
        else:
            raise InvalidInputError(f"unknown gate kind {self.kind!r}")
        if len(qubits) != arity:
            raise InvalidInputError(f"{self.kind} acts on {arity} qubit(s), got {qubits}")
        if len(set(qubits)) != arity or min(qubits) < 0:
            raise InvalidInputError(f"invalid qubit indices {qubits} for {self.kind}")
        if not math.isfinite(self.angle):
            raise InvalidInputError(f"non-finite angle for {self.kind}")

    @property
    def is_two_qubit(self) -> bool:
        return self.kind in TWO_QUBIT_KINDS

    def inverse(self) -> Gate:
        if self.kind in _SELF_INVERSE:
            return self
        if self.kind in _INVERSE_NAME:
            return Gate(_INVERSE_NAME[self.kind], self.qubits)
        return Gate(self.kind, self.qubits, -self.angle)

    def matrix(self) -> np.ndarray:
        """2x2 matrix for one-qubit gates, 4x4 (control = high bit) for two-qubit gates."""
        k, a = self.kind, self.angle
        if k in _FIXED:
            return _FIXED[k].copy()
        if k == "Rx":
            c, s = math.cos(a / 2), math.sin(a / 2)
            return np.array([[c, -1j * s], [-1j * s, c]])
        if k == "Ry":
            c, s = math.cos(a / 2), math.sin(a / 2)
            return np.array([[c, -s], [s, c]], dtype=complex)
        if k == "Rz":
            return np.diag([np.exp(-0.5j * a), np.exp(0.5j * a)])
        if k == "Phase":
            return np.diag([1, np.exp(1j * a)])
        if k == "GPhase":
            return np.exp(1j * a) * np.eye(2, dtype=complex)
        if k == "CNOT":
            return np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
        return np.diag([1, 1, 1, np.exp(1j * a)])

    def __str__(self):
        qs = ",".join(f"q{q}" for q in self.qubits)
        if self.kind in ANGLE_KINDS:
            return f"{self.kind}({self.angle:.12g}) {qs}"
        return f"{self.kind} {qs}"


@dataclass
class CompiledCircuit:
    n_qubits: int
    codes: np.ndarray
    qubits: np.ndarray
    mats: np.ndarray
    angles: np.ndarray


class Circuit:
    """An ordered gate list on a fixed register."""

    def __init__(self, n_qubits: int, gates: Iterable[Gate] = ()):
        if n_qubits < 1:
            raise InvalidInputError("a circuit needs at least one qubit")
        self.n_qubits = int(n_qubits)
        self.gates: list[Gate] = []
        self.extend(gates)

    def append(self, gate: Gate) -> Circuit:
        if max(gate.qubits) >= self.n_qubits:
            raise InvalidInputError(f"gate {gate} out of range for {self.n_qubits} qubits")
        self.gates.append(gate)
        return self

    def add(self, kind: str, *qubits: int, angle: float = 0.0) -> Circuit:
        return self.append(Gate(kind, qubits, angle))

    def extend(self, gates: Iterable[Gate]) -> Circuit:
        for g in gates:
            self.append(g)
        return self

    def __iter__(self):
        return iter(self.gates)

    def __len__(self):
        return len(self.gates)

    def __add__(self, other: Circuit) -> Circuit:
        if other.n_qubits != self.n_qubits:
            raise InvalidInputError("register size mismatch")
        return Circuit(self.n_qubits, self.gates + other.gates)

    def inverse(self) -> Circuit:
        return Circuit(self.n_qubits, [g.inverse() for g in reversed(self.gates)])

    def remapped(self, mapping: Sequence[int], n_qubits: int) -> Circuit:
        """Copy onto a larger register, sending qubit ``q`` to ``mapping[q]``."""
        return Circuit(n_qubits, [Gate(g.kind, tuple(mapping[q] for q in g.qubits), g.angle)
                                  for g in self.gates])

    def to_text(self) -> str:
        return "\n".join([f"# {self.n_qubits} qubits, {len(self.gates)} gates"]
                         + [str(g) for g in self.gates])

    def compile(self) -> CompiledCircuit:
        """Flatten to the arrays the kernels consume."""
        count = len(self.gates)
        codes = np.zeros(count, dtype=np.int64)
        qubits = np.zeros((count, 2), dtype=np.int64)
        mats = np.zeros((count, 2, 2), dtype=complex)
        angles = np.zeros(count)
        for i, g in enumerate(self.gates):
            if g.kind == "CNOT":
                codes[i] = _kernels.CNOT
                qubits[i] = g.qubits
            elif g.kind == "CPhase":
                codes[i] = _kernels.CPHASE
                qubits[i] = g.qubits
                angles[i] = g.angle
            else:
                codes[i] = _kernels.ONE_QUBIT
                qubits[i, 0] = g.qubits[0]
                mats[i] = g.matrix()
        return CompiledCircuit(self.n_qubits, codes, qubits, mats, angles)

    def unitary(self) -> np.ndarray:
        """Dense unitary, built by running every basis state (small registers only)."""
        dim = 1 << self.n_qubits
        cols = apply_circuit(np.eye(dim, dtype=complex), self)
        return cols.T


@dataclass(frozen=True)
class NoiseModel:
    """Per-gate depolarizing noise as random Pauli insertions.

    After a one-qubit gate, with probability ``p1`` a Pauli drawn uniformly
    from ``paulis`` hits that qubit; after a two-qubit gate, with probability
    ``p2`` it hits one of the two qubits chosen uniformly.
    """

    p1: float = 0.001
    p2: float = 0.01
    seed: int | None = None
    paulis: str = "XYZ"

    def __post_init__(self):
        for name in ("p1", "p2"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise InvalidInputError(f"{name} must lie in [0, 1], got {p}")
        if not self.paulis or any(c not in "XYZ" for c in self.paulis):
            raise InvalidInputError("paulis must be a non-empty subset of 'XYZ'")

    @property
    def is_noiseless(self) -> bool:
        return self.p1 == 0.0 and self.p2 == 0.0

    def pauli_matrices(self) -> np.ndarray:
        return np.array([PAULI_MATRICES[c] for c in self.paulis], dtype=complex)


@dataclass
class ShotResult:
    counts: dict[int, int]
    shots: int
    qubits: tuple[int, ...] = field(default=())

    def frequency(self, outcome: int) -> float:
        return self.counts.get(outcome, 0) / self.shots


def zero_state(n_qubits: int) -> np.ndarray:
    psi = np.zeros(1 << n_qubits, dtype=complex)
    psi[0] = 1.0
    return psi


def _as_batch(state, n_qubits: int) -> tuple[np.ndarray, bool]:
    arr = np.array(state, dtype=complex, order="C", copy=True)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 1 << n_qubits:
        raise InvalidInputError(
            f"state of shape {np.shape(state)} does not fit {n_qubits} qubits")
    return arr, single


def apply_circuit(state: np.ndarray, circuit: Circuit | CompiledCircuit) -> np.ndarray:
    """Return ``U|state>`` (a new array). Accepts a single state or a batch of rows."""
    cc = circuit.compile() if isinstance(circuit, Circuit) else circuit
    states, single = _as_batch(state, cc.n_qubits)
    if cc.codes.size:
        _kernels.run_gates(states, cc.codes, cc.qubits, cc.mats, cc.angles, cc.n_qubits)
    return states[0] if single else states


def expectation(state: np.ndarray, obs: PauliSum) -> float:
    """Exact ``<psi|O|psi>`` for a Hermitian observable."""
    state = np.asarray(state, dtype=complex)
    val = np.vdot(state, obs.apply(state))
    scale = max(1.0, sum(abs(t.coeff) for t in obs))
    if abs(val.imag) > 1e-8 * scale:
        raise InvalidInputError("observable is not Hermitian (complex expectation)")
    return float(val.real)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def marginal_probabilities(state: np.ndarray, qubits: Sequence[int], n_qubits: int) -> np.ndarray:
    """Probabilities over the listed qubits; the first listed qubit is the high bit."""
    probs = np.abs(np.asarray(state)) ** 2
    probs = probs.reshape((2,) * n_qubits)
    rest = tuple(q for q in range(n_qubits) if q not in qubits)
    marg = probs.sum(axis=rest) if rest else probs
    # axes left after the sum are in ascending qubit order; reorder to `qubits`
    kept = sorted(qubits)
    marg = np.transpose(marg, [kept.index(q) for q in qubits])
    return marg.reshape(-1)


def sample(state: np.ndarray, qubits: Sequence[int] | None, shots: int, seed=None) -> ShotResult:
    """Draw ``shots`` computational-basis outcomes over ``qubits`` (all if None)."""
    if shots < 1:
        raise InvalidInputError("shots must be >= 1")
    state = np.asarray(state)
    n = int(state.shape[-1]).bit_length() - 1
    qubits = tuple(range(n)) if qubits is None else tuple(qubits)
    probs = marginal_probabilities(state, qubits, n)
    probs = probs / probs.sum()
    draws = _rng(seed).multinomial(shots, probs)
    counts = {int(i): int(c) for i, c in enumerate(draws) if c}
    return ShotResult(counts, shots, qubits)


def _draw_noise(rng: np.random.Generator, n_gates: int, batch: int, n_paulis: int):
    err_u = rng.random((n_gates, batch))
    qsel = rng.integers(0, 2, size=(n_gates, batch))
    psel = rng.integers(0, n_paulis, size=(n_gates, batch))
    return err_u, qsel, psel


def run_trajectories(state: np.ndarray, circuit: Circuit | CompiledCircuit, noise: NoiseModel,
                     count: int, seed=None) -> np.ndarray:
    """``count`` independent noisy trajectories from one start state, shape (count, 2**n).

    All random numbers are drawn up front, so the numba and numpy kernels see
    identical randomness and give identical trajectories.
    """
    cc = circuit.compile() if isinstance(circuit, Circuit) else circuit
    start = np.asarray(state, dtype=complex)
    states = np.array(np.broadcast_to(start, (count, start.shape[-1])), order="C")
    if cc.codes.size == 0:
        return states
    rng = _rng(seed if seed is not None else noise.seed)
    paulis = noise.pauli_matrices()
    err_u, qsel, psel = _draw_noise(rng, cc.codes.size, count, len(paulis))
    _kernels.run_noisy(states, cc.codes, cc.qubits, cc.mats, cc.angles, cc.n_qubits,
                       err_u, qsel, psel, float(noise.p1), float(noise.p2), paulis)
    return states


def apply_noisy_circuit(state: np.ndarray, circuit: Circuit, noise: NoiseModel,
                        seed=None) -> np.ndarray:
    """One noisy trajectory, reproducible from ``seed`` (or ``noise.seed``)."""
    return run_trajectories(state, circuit, noise, 1, seed)[0]


def measurement_basis_circuit(axes: str) -> Circuit:
    """Rotate each X/Y axis of ``axes`` onto Z: H for X, then SDag followed by H for Y."""
    c = Circuit(len(axes))
    for q, a in enumerate(axes):
        if a == "X":
            c.add("H", q)
        elif a == "Y":
            c.add("SDag", q)
            c.add("H", q)
    return c


def _group_axes(group: Sequence[PauliString], n: int) -> str:
    axes = ["I"] * n
    for p in group:
        for q, a in enumerate(p.axes):
            if a != "I":
                if axes[q] not in ("I", a):
                    raise InvalidInputError("group is not qubit-wise commuting")
                axes[q] = a
    return "".join(axes)


def _parity_table(group: Sequence[PauliString], n: int) -> np.ndarray:
    """Row k holds the +-1 eigenvalue of group[k] for each measured basis index."""
    idx = np.arange(1 << n)
    rows = []
    for p in group:
        mask = 0
        for q, a in enumerate(p.axes):
            if a != "I":
                mask |= 1 << (n - 1 - q)
        bits = np.zeros_like(idx)
        m = idx & mask
        while np.any(m):
            bits ^= m & 1
            m = m >> 1
        rows.append(1 - 2 * bits)
    return np.array(rows, dtype=float)


def _sample_rows(probs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One outcome per row of a (batch, dim) probability table."""
    cdf = np.cumsum(probs, axis=1)
    cdf /= cdf[:, -1:]
    u = rng.random((probs.shape[0], 1))
    return np.minimum((u > cdf).sum(axis=1), probs.shape[1] - 1)


TRAJECTORY_CHUNK = 1 << 20  # amplitudes per chunk of noisy trajectories


def group_outcome_counts(circuit: Circuit, initial_state: np.ndarray, shots: int,
                         noise: NoiseModel | None, rng: np.random.Generator) -> np.ndarray:
    """Histogram over all basis indices of ``shots`` measurements after ``circuit``.

    With noise, every shot is its own trajectory.
    """
    dim = 1 << circuit.n_qubits
    if noise is None or noise.is_noiseless:
        probs = np.abs(apply_circuit(initial_state, circuit)) ** 2
        return rng.multinomial(shots, probs / probs.sum())
    cc = circuit.compile()
    counts = np.zeros(dim, dtype=np.int64)
    chunk = max(1, TRAJECTORY_CHUNK // dim)
    done = 0
    while done < shots:
        b = min(chunk, shots - done)
        states = run_trajectories(initial_state, cc, noise, b, rng)
        outcomes = _sample_rows(np.abs(states) ** 2, rng)
        counts += np.bincount(outcomes, minlength=dim)
        done += b
    return counts


def estimate_expectation_sampled(prep: Circuit, obs: PauliSum, shots: int,
                                 grouping: Sequence[Sequence[PauliString]] | None = None,
                                 noise: NoiseModel | None = None, seed=None,
                                 initial_state: np.ndarray | None = None,
                                 return_variance: bool = False):
    """Shot-based estimate of ``<O>`` with one measurement circuit per group.

    ``grouping`` defaults to one group per non-identity term. The identity
    coefficient is added exactly. Each group draws from its own child of
    ``SeedSequence(seed)``. With ``return_variance`` the estimator's variance
    (from the empirical per-group covariance) is returned as well.
    """
    if shots < 1:
        raise InvalidInputError("shots must be >= 1")
    n = prep.n_qubits
    if obs.n_qubits != n:
        raise InvalidInputError("observable and circuit sizes differ")
    obs = obs.canonicalize()
    ident = "I" * n
    const = sum(t.coeff.real for t in obs if t.axes == ident)
    if grouping is None:
        grouping = [[t] for t in obs if t.axes != ident]
    start = zero_state(n) if initial_state is None else np.asarray(initial_state, dtype=complex)
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = root.spawn(len(grouping)) if grouping else []
    total, variance = float(const), 0.0
    for group, child in zip(grouping, children):
        group = [t for t in group if t.axes != ident]
        if not group:
            continue
        circ = prep + measurement_basis_circuit(_group_axes(group, n))
        counts = group_outcome_counts(circ, start, shots, noise, np.random.default_rng(child))
        coeffs = np.array([t.coeff.real for t in group])
        per_outcome = coeffs @ _parity_table(group, n)
        freq = counts / shots
        mean = float(freq @ per_outcome)
        total += mean
        variance += float(freq @ (per_outcome - mean) ** 2) / shots
    return (total, variance) if return_variance else total


def singlet_preparation(n_qubits: int = 2, first: int = 0, second: int = 1) -> Circuit:
    """Prepare ``(|01> - |10>)/sqrt(2)`` on (first, second) from ``|0...0>``."""
    c = Circuit(n_qubits)
    c.add("X", second)
    c.add("H", first)
    c.add("CNOT", first, second)
    c.add("Z", first)
    return c


def state_norm_ok(state: np.ndarray, tol: float = NORM_TOL) -> bool:
    return abs(np.linalg.norm(state) - 1.0) <= tol
