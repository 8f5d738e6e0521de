import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from nmrqsim.errors import (CannotCompleteError, DegenerateInputError, InvalidInputError,
                            ResourceLimitError)
from nmrqsim.exact_diag import eigen_decompose
from nmrqsim.pauli import PauliString, PauliSum, trotter_error_bound
from nmrqsim.simulator import Circuit, apply_circuit
from nmrqsim.trotter_qpe import (QpeConfig, ScaledHamiltonian, complete_by_trace,
                                 inverse_qft_network, pauli_exponential, qpe_distribution,
                                 qpe_distribution_unitary, required_ancillas, run_qpe,
                                 scale_hamiltonian, trotterized_unitary)

from .conftest import random_pauli_sum, random_state
from .oracles import kron_string, pauli_exp

FLOOR = 4 / math.pi ** 2
axes_3 = st.text(alphabet="IXYZ", min_size=3, max_size=3)


@pytest.mark.parametrize("style", ["hadamard", "rotation"])
@given(axes=axes_3, phi=st.floats(-3, 3))
def test_pauli_exponential_matches_expm(style, axes, phi):
    c = Circuit(3, pauli_exponential(axes, phi, style))
    np.testing.assert_allclose(c.unitary(), pauli_exp(axes, phi), atol=1e-10)


@pytest.mark.parametrize("style", ["hadamard", "rotation"])
@given(axes=axes_3, phi=st.floats(-3, 3))
def test_controlled_pauli_exponential(style, axes, phi):
    # control on qubit 0, exponential on qubits 1..3
    gates = pauli_exponential("I" + axes, phi, style, control=0)
    u = Circuit(4, gates).unitary()
    p0, p1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    want = np.kron(p0, np.eye(8)) + np.kron(p1, pauli_exp(axes, phi))
    np.testing.assert_allclose(u, want, atol=1e-10)


def test_pauli_exponential_rejects_unknown_style():
    with pytest.raises(InvalidInputError):
        pauli_exponential("XZ", 0.1, style="euler")


def test_commuting_terms_have_no_trotter_error():
    h = PauliSum([PauliString("ZI", 0.3), PauliString("IZ", -0.7), PauliString("ZZ", 0.2)])
    u = trotterized_unitary(h, 1.3, 1).unitary()
    np.testing.assert_allclose(u, expm(1j * 1.3 * h.to_dense()), atol=1e-12)


@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_trotter_error_within_bound(seed, r):
    h = random_pauli_sum(np.random.default_rng(seed), 2, 4, scale=0.3)
    t = 1.0
    u = trotterized_unitary(h, t, r).unitary()
    err = np.linalg.norm(u - expm(1j * t * h.to_dense()))
    assert err <= trotter_error_bound(h, t, r) + 1e-10


def test_trotter_error_shrinks_like_one_over_r():
    h = random_pauli_sum(np.random.default_rng(4), 2, 5, scale=0.3)
    exact = expm(1j * h.to_dense())
    errs = [np.linalg.norm(trotterized_unitary(h, 1.0, r).unitary() - exact)
            for r in (10, 20, 40)]
    assert errs[0] / errs[1] == pytest.approx(2, rel=0.1)
    assert errs[1] / errs[2] == pytest.approx(2, rel=0.1)


def test_scaling_bounds_spectrum(ham):
    s = scale_hamiltonian(ham)
    ev = np.linalg.eigvalsh(s.scaled.to_dense())
    assert np.all(np.abs(ev) <= 0.25)
    assert s.to_eigenvalue(ev[0]) == pytest.approx(np.linalg.eigvalsh(ham.to_dense())[0])
    with pytest.raises(DegenerateInputError):
        scale_hamiltonian(PauliSum([PauliString("XZ", 0.0)]))


@pytest.mark.parametrize("n, eps, want", [(2, 0.1, 5), (10, 0.25, 12), (1, 0.5, 3)])
def test_required_ancillas(n, eps, want):
    assert required_ancillas(n, eps) == want


def test_required_ancillas_validation():
    with pytest.raises(InvalidInputError):
        required_ancillas(2, 0.0)
    with pytest.raises(InvalidInputError):
        required_ancillas(0, 0.1)


@pytest.mark.parametrize("t", [1, 3, 5])
def test_inverse_qft_network_decodes_phase_states(t):
    n = 1 << t
    for x in range(n):
        # ancilla j carries e^{2 pi i x 2^j / N}, as after the controlled powers
        psi = np.array([1.0 + 0j])
        for j in range(t):
            psi = np.kron(psi, np.array([1, np.exp(2j * np.pi * x * 2 ** j / n)]) / np.sqrt(2))
        out = apply_circuit(psi, Circuit(t, inverse_qft_network(t)))
        assert abs(out[x]) ** 2 == pytest.approx(1.0)


def test_gate_level_and_compiled_paths_agree():
    rng = np.random.default_rng(5)
    h = random_pauli_sum(rng, 2, 5)
    s = scale_hamiltonian(h)
    init = random_state(rng, 2)
    a = qpe_distribution(s, QpeConfig(t_ancillas=4, trotter_steps=3, method="circuit"), init)
    b = qpe_distribution(s, QpeConfig(t_ancillas=4, trotter_steps=3), init)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_shift_equals_adding_a_multiple_of_identity():
    rng = np.random.default_rng(6)
    h = random_pauli_sum(rng, 2, 5)
    s = scale_hamiltonian(h)
    lifted = ScaledHamiltonian((s.scaled + 0.25).canonicalize(), s.c_scale, h)
    init = random_state(rng, 2)
    cfg = QpeConfig(t_ancillas=4, trotter_steps=2, method="circuit")
    np.testing.assert_allclose(qpe_distribution(s, cfg, init, shift=0.25),
                               qpe_distribution(lifted, cfg, init, shift=0.0), atol=1e-12)


@given(st.floats(0.0, 1.0, exclude_max=True))
def test_modal_probability_floor_exact_unitary(phase):
    u = np.array([[np.exp(2j * np.pi * phase)]])
    p = qpe_distribution_unitary(u, np.array([1.0]), 6, shift=0.0)
    assert p.sum() == pytest.approx(1.0)
    assert p.max() >= FLOOR - 1e-12
    nearest = round(phase * 64) % 64
    assert np.argmax(p) == nearest or p[nearest] >= FLOOR - 1e-12


def test_overlap_weights_mix_linearly():
    rng = np.random.default_rng(10)
    h = random_pauli_sum(rng, 2, 5)
    s = scale_hamiltonian(h)
    d = eigen_decompose(h)
    u = expm(2j * np.pi * s.scaled.to_dense())
    c = np.array([0.6, 0.0, 0.64j, 0.48])
    mix = d.eigenvectors @ c
    want = sum(abs(c[k]) ** 2 * qpe_distribution_unitary(u, d.vector(k), 8) for k in range(4))
    np.testing.assert_allclose(qpe_distribution_unitary(u, mix, 8), want, atol=1e-12)


def test_one_qubit_grid_aligned_phase():
    s = ScaledHamiltonian(PauliSum([PauliString("Z", 0.25)]), 1.0, PauliSum([PauliString("Z", 0.25)]))
    p = qpe_distribution(s, QpeConfig(t_ancillas=4, trotter_steps=1, method="circuit"),
                         np.array([1.0, 0.0]))
    # phase 0.25 + shift 0.25 = 0.5 -> x = 8
    assert np.argmax(p) == 8 and p[8] == pytest.approx(1.0)


def test_run_qpe_recovers_reference_spectrum(ref_ham):
    d = eigen_decompose(ref_ham)
    cfg = QpeConfig(t_ancillas=10, trotter_steps=10, seed=3)
    found = run_qpe(ref_ham, cfg, [d.vector(k) for k in range(4)])
    assert len(found) == 4 and all(f.verified for f in found)
    cell = scale_hamiltonian(ref_ham).c_scale / 2 ** 10
    for f, lam in zip(found, d.eigenvalues):
        assert abs(f.eigenvalue - lam) <= cell


def test_run_qpe_random_states_deterministic(ref_ham):
    cfg = QpeConfig(t_ancillas=8, trotter_steps=5, seed=1, max_attempts=5)
    a = run_qpe(ref_ham, cfg, n_random=3)
    b = run_qpe(ref_ham, cfg, n_random=3)
    assert [e.raw_index for e in a] == [e.raw_index for e in b]


def test_qubit_cap_enforced(ref_ham):
    s = scale_hamiltonian(ref_ham)
    with pytest.raises(ResourceLimitError):
        qpe_distribution(s, QpeConfig(t_ancillas=19, method="circuit"), np.eye(4)[0])


def test_complete_by_trace():
    assert complete_by_trace([1.0, 2.0], 0.0) == [1.0, 2.0, -3.0]
    assert complete_by_trace([1.0, 2.0, 3.0], 6.0, expected_count=3) == [1.0, 2.0, 3.0]
    assert complete_by_trace([1.0], 3.0, expected_count=2) == [1.0, 2.0]
    with pytest.raises(CannotCompleteError):
        complete_by_trace([1.0], 0.0, expected_count=4)


def test_config_validation():
    with pytest.raises(InvalidInputError):
        QpeConfig(t_ancillas=0)
    with pytest.raises(InvalidInputError):
        QpeConfig(method="magic")


def test_kron_helper_sanity():
    assert kron_string("XZ").shape == (4, 4)
