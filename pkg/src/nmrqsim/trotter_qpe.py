"""Trotterized evolution circuits and quantum phase estimation.

The evolution operator is ``U = exp(i 2 pi H_s)`` with ``H_s = H / C`` so that
the spectrum of ``H_s`` lies in ``[-0.25, 0.25]``. An extra phase of
``2 pi * 0.25 * 2**j`` on ancilla ``j`` shifts every eigenphase by ``+0.25``,
so measured phases fall in ``[0, 0.5]`` and map back to eigenvalues as
``lambda = C * (x / 2**t - 0.25)``.

Register layout for QPE: ancillas are qubits ``0..t-1``, the system occupies
qubits ``t..t+m-1``. Ancilla ``j`` controls ``U**(2**j)``; with qubit 0 as the
most significant bit this bit-reversed placement absorbs the swap stage of
the inverse QFT, and the measured ancilla index is ``x`` directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (CannotCompleteError, DegenerateInputError, InvalidInputError,
                     ResourceLimitError)
from .exact_diag import verify_eigenvalue
from .pauli import DENSE_QUBIT_CAP, PauliSum, canonical_order, eigen_range_bounds
from .simulator import Circuit, Gate, apply_circuit

SHIFT = 0.25


# --- Pauli exponentials -----------------------------------------------------

def pauli_exponential(axes: str, phi: float, style: str = "hadamard",
                      control: int | None = None) -> list[Gate]:
    """Gates for ``exp(-i phi P)`` where ``P`` is the Pauli string ``axes``.

    Each X/Y axis is rotated onto Z, a CNOT ladder collects the parity on the
    last non-identity qubit, ``Rz(2 phi)`` acts there and everything is undone.
    ``style="rotation"`` uses the ``Ry(pi/2)`` / ``Rx(-pi/2)`` pair on the
    *left* of the Rz (the form drawn for the two-spin ansatz); each such
    factor conjugates the axis to minus Z, so the Rz angle picks up a sign per
    X/Y factor.

    With ``control`` set only the Rz (and the identity-string phase) is
    controlled: when the control is 0 the basis changes and ladders cancel
    pairwise, so this is exactly the controlled exponential.
    """
    if style not in ("hadamard", "rotation"):
        raise InvalidInputError(f"unknown basis-change style {style!r}")
    support = [q for q, a in enumerate(axes) if a != "I"]
    if not support:
        # exp(-i phi I) is a global phase
        if control is None:
            return [Gate("GPhase", (0,), -phi)]
        return [Gate("Phase", (control,), -phi)]
    pre: list[Gate] = []
    sign = 1.0
    for q in support:
        a = axes[q]
        if a == "X":
            if style == "hadamard":
                pre.append(Gate("H", (q,)))
            else:
                pre.append(Gate("Ry", (q,), math.pi / 2))
                sign = -sign
        elif a == "Y":
            if style == "hadamard":
                pre.append(Gate("Rx", (q,), math.pi / 2))
            else:
                pre.append(Gate("Rx", (q,), -math.pi / 2))
                sign = -sign
    ladder = [Gate("CNOT", (support[i], support[i + 1])) for i in range(len(support) - 1)]
    last = support[-1]
    theta = 2.0 * phi * sign
    if control is None:
        middle = [Gate("Rz", (last,), theta)]
    else:
        middle = [Gate("Phase", (control,), -theta / 2), Gate("CPhase", (control, last), theta)]
    post = [g.inverse() for g in reversed(pre)]
    return pre + ladder + middle + ladder[::-1] + post


def trotter_step_gates(h: PauliSum, t: float, control: int | None = None,
                       style: str = "hadamard") -> list[Gate]:
    """One first-order step of ``exp(i t H)``, terms in canonical order."""
    _require_real(h)
    gates: list[Gate] = []
    for term in canonical_order(h.canonicalize()):
        gates += pauli_exponential(term.axes, -term.coeff.real * t, style, control)
    return gates


def trotter_step_circuit(h: PauliSum, t: float) -> Circuit:
    return Circuit(h.n_qubits, trotter_step_gates(h, t))


def trotterized_unitary(h: PauliSum, t: float, r: int) -> Circuit:
    """``r`` repetitions of a step of length ``t / r``: approximates ``exp(i t H)``."""
    if r < 1:
        raise InvalidInputError("trotter steps must be >= 1")
    step = trotter_step_gates(h, t / r)
    return Circuit(h.n_qubits, step * r)


def _require_real(h: PauliSum):
    if not h.is_hermitian():
        raise InvalidInputError("Hamiltonian must be Hermitian (real Pauli coefficients)")


# --- scaling ------------------------------------------------------------------

@dataclass(frozen=True)
class ScaledHamiltonian:
    scaled: PauliSum
    c_scale: float
    original: PauliSum

    def to_eigenvalue(self, scaled_value: float) -> float:
        return self.c_scale * scaled_value


def scale_hamiltonian(h: PauliSum) -> ScaledHamiltonian:
    """Divide by ``C = 4 * max(|lower|, |upper|)`` of the trace-based bounds."""
    _require_real(h)
    lo, hi = eigen_range_bounds(h)
    c = 4.0 * max(abs(lo), abs(hi))
    if c == 0.0:
        raise DegenerateInputError("zero Hamiltonian has no scale")
    return ScaledHamiltonian(h / c, c, h)


def required_ancillas(n_bits: int, epsilon: float) -> int:
    """``n + ceil(log2(2 + 1/(2 eps)))``: ancillas for ``n`` bits with failure rate ``eps``."""
    if not 0.0 < epsilon < 1.0:
        raise InvalidInputError("epsilon must lie in (0, 1)")
    if n_bits < 1:
        raise InvalidInputError("n_bits must be >= 1")
    extra = math.log2(2.0 + 1.0 / (2.0 * epsilon))
    return int(n_bits + math.ceil(extra - 1e-12))


# --- QPE ----------------------------------------------------------------------

@dataclass(frozen=True)
class QpeConfig:
    t_ancillas: int = 12
    trotter_steps: int = 10
    shots: int = 1
    max_attempts: int = 20
    seed: int | None = None
    method: str = "compiled"  # "compiled" (exact, fast) or "circuit" (gate level)
    qubit_cap: int = 20

    def __post_init__(self):
        if self.t_ancillas < 1:
            raise InvalidInputError("t_ancillas must be >= 1")
        if self.trotter_steps < 1:
            raise InvalidInputError("trotter_steps must be >= 1")
        if self.shots < 1 or self.max_attempts < 1:
            raise InvalidInputError("shots and max_attempts must be >= 1")
        if self.method not in ("compiled", "circuit"):
            raise InvalidInputError(f"unknown QPE method {self.method!r}")


@dataclass
class PhaseEstimate:
    raw_index: int
    phase: float          # raw_index / 2**t, includes the +0.25 shift
    eigenvalue: float     # c_scale * (phase - 0.25)
    verified: bool
    t_ancillas: int
    count: int = 1
    bins: list[int] = field(default_factory=list)
    source: int = -1      # index of the initial state that produced it

    @property
    def shifted_phase(self) -> float:
        """Scaled eigenvalue ``phase - 0.25``."""
        return self.phase - SHIFT


def inverse_qft_network(t: int) -> list[Gate]:
    """Controlled-phase network of the inverse QFT without the final swaps."""
    gates = []
    for i in range(t - 1, -1, -1):
        for k in range(t - i, 1, -1):
            gates.append(Gate("CPhase", (i + k - 1, i), -2.0 * math.pi / 2 ** k))
        gates.append(Gate("H", (i,)))
    return gates


def qpe_circuit(scaled: ScaledHamiltonian, cfg: QpeConfig, shift: float = SHIFT) -> Circuit:
    """Full gate-level QPE circuit on ``t + m`` qubits (ancillas first).

    Run it on ``|0...0>_anc (x) |initial>``; see :func:`qpe_initial_state`.
    """
    t, m = cfg.t_ancillas, scaled.scaled.n_qubits
    if t + m > cfg.qubit_cap:
        raise ResourceLimitError(f"{t + m} qubits exceeds the cap of {cfg.qubit_cap}")
    sys_map = list(range(t, t + m))
    h_sys = _relabel(scaled.scaled, sys_map, t + m)
    c = Circuit(t + m)
    for j in range(t):
        c.add("H", j)
    for j in range(t):
        step = trotter_step_gates(h_sys, 2 * math.pi / cfg.trotter_steps, control=j)
        c.extend(step * (cfg.trotter_steps * 2 ** j))
        if shift:
            c.add("Phase", j, angle=2 * math.pi * shift * 2 ** j)
    c.extend(inverse_qft_network(t))
    return c


def _relabel(h: PauliSum, mapping: Sequence[int], n_total: int) -> PauliSum:
    from .pauli import PauliString
    terms = []
    for p in h:
        axes = ["I"] * n_total
        for q, a in enumerate(p.axes):
            axes[mapping[q]] = a
        terms.append(PauliString("".join(axes), p.coeff))
    return PauliSum(terms, n_total)


def qpe_initial_state(t: int, system_state: np.ndarray) -> np.ndarray:
    anc = np.zeros(1 << t, dtype=complex)
    anc[0] = 1.0
    return np.kron(anc, np.asarray(system_state, dtype=complex))


def ancilla_distribution_from_state(state: np.ndarray, t: int) -> np.ndarray:
    probs = np.abs(state.reshape(1 << t, -1)) ** 2
    return probs.sum(axis=1)


def qpe_distribution_unitary(u: np.ndarray, initial: np.ndarray, t: int,
                             shift: float = SHIFT) -> np.ndarray:
    """Exact ancilla distribution of QPE with a dense system unitary ``u``.

    After the controlled powers the joint state is
    ``sum_k |k> (x) e^{2 pi i shift k} U^k |phi> / sqrt(N)``; the inverse QFT
    is then a DFT along ``k``.
    """
    n = 1 << t
    a = np.empty((n, u.shape[0]), dtype=complex)
    a[0] = np.asarray(initial, dtype=complex)
    for k in range(1, n):
        a[k] = u @ a[k - 1]
    a *= np.exp(2j * math.pi * shift * np.arange(n))[:, None]
    b = np.fft.fft(a, axis=0) / n
    return (np.abs(b) ** 2).sum(axis=1)


def trotter_system_unitary(scaled: ScaledHamiltonian, steps: int) -> np.ndarray:
    """Dense matrix of the Trotterized ``exp(i 2 pi H_s)`` (simulated column by column)."""
    m = scaled.scaled.n_qubits
    if m > DENSE_QUBIT_CAP:
        raise ResourceLimitError(f"{m} qubits exceeds dense cap {DENSE_QUBIT_CAP}")
    return trotterized_unitary(scaled.scaled, 2 * math.pi, steps).unitary()


def qpe_distribution(scaled: ScaledHamiltonian, cfg: QpeConfig, initial: np.ndarray,
                     shift: float = SHIFT) -> np.ndarray:
    """Probability of each ancilla outcome ``x`` for one initial system state."""
    initial = np.asarray(initial, dtype=complex)
    if cfg.method == "circuit":
        circ = qpe_circuit(scaled, cfg, shift)
        final = apply_circuit(qpe_initial_state(cfg.t_ancillas, initial), circ)
        return ancilla_distribution_from_state(final, cfg.t_ancillas)
    u = trotter_system_unitary(scaled, cfg.trotter_steps)
    return qpe_distribution_unitary(u, initial, cfg.t_ancillas, shift)


def random_initial_state(n_qubits: int, rng: np.random.Generator) -> np.ndarray:
    """Normalized vector with independent complex normal amplitudes."""
    dim = 1 << n_qubits
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def run_qpe(h: PauliSum, cfg: QpeConfig, initial_states: Sequence[np.ndarray] | None = None,
            n_random: int = 4, verify: bool = True) -> list[PhaseEstimate]:
    """Sample QPE outcomes and turn them into verified eigenvalue estimates.

    For each initial state (``n_random`` seeded random states if none are
    given) up to ``cfg.max_attempts`` runs of ``cfg.shots`` shots are drawn
    until an outcome passes the determinant check. Estimates whose eigenvalues
    lie within one grid cell ``C / 2**t`` of an earlier one are merged; the
    merged entry keeps every bin it saw.
    """
    scaled = scale_hamiltonian(h)
    rng = np.random.default_rng(cfg.seed)
    if initial_states is None:
        initial_states = [random_initial_state(h.n_qubits, rng) for _ in range(n_random)]
    t = cfg.t_ancillas
    cell = scaled.c_scale / 2 ** t
    dense = h.to_dense() if verify and h.n_qubits <= DENSE_QUBIT_CAP else None
    tol = None
    if dense is not None:
        hnorm = np.linalg.norm(dense, axis=1).max()
        tol = cell / hnorm if hnorm > 0 else 1e-6

    u = None
    if cfg.method == "compiled":
        u = trotter_system_unitary(scaled, cfg.trotter_steps)
    found: list[PhaseEstimate] = []
    for src, state in enumerate(initial_states):
        if u is not None:
            probs = qpe_distribution_unitary(u, state, t)
        else:
            probs = qpe_distribution(scaled, cfg, state)
        probs = probs / probs.sum()
        for _ in range(cfg.max_attempts):
            counts = rng.multinomial(cfg.shots, probs)
            x = int(np.argmax(counts))
            phase = x / 2 ** t
            lam = scaled.c_scale * (phase - SHIFT)
            ok = bool(verify_eigenvalue(dense, lam, tol)) if dense is not None else False
            est = PhaseEstimate(x, phase, lam, ok, t, int(counts[x]), [x], src)
            _merge(found, est, cell)
            if ok:
                break
    found.sort(key=lambda e: e.eigenvalue)
    return found


def _merge(found: list[PhaseEstimate], est: PhaseEstimate, cell: float):
    for f in found:
        if abs(f.eigenvalue - est.eigenvalue) <= cell * (1 + 1e-9):
            f.count += est.count
            if est.raw_index not in f.bins:
                f.bins.append(est.raw_index)
            if est.verified and not f.verified:
                f.raw_index, f.phase, f.eigenvalue = est.raw_index, est.phase, est.eigenvalue
                f.verified = True
            return
    found.append(est)


def complete_by_trace(found: Sequence[float], trace: float,
                      expected_count: int | None = None) -> list[float]:
    """Fill in the one missing eigenvalue as ``trace - sum(found)``.

    With ``expected_count`` given, a complete list is returned unchanged and
    more than one gap raises :class:`CannotCompleteError`. Without it exactly
    one value is assumed missing.
    """
    found = [float(v) for v in found]
    if expected_count is None:
        return found + [trace - sum(found)]
    missing = expected_count - len(found)
    if missing == 0:
        return found
    if missing != 1:
        raise CannotCompleteError(
            f"{missing} eigenvalues missing; the trace fixes only one")
    return found + [trace - sum(found)]
