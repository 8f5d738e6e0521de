"""Acceptance criteria 1-12, each at its stated tolerance and runtime budget.

Every test records one ``criterion N PASS|FAIL`` line; the lines are printed
as they happen and again, in order, in the terminal summary.
"""
import math
import time
from contextlib import contextmanager

import numpy as np
import pytest
from scipy.linalg import expm

from nmrqsim.exact_diag import EigenDecomposition, eigen_decompose
from nmrqsim.pauli import eigen_range_bounds, trotter_error_bound
from nmrqsim.simulator import (NoiseModel, apply_circuit, expectation, singlet_preparation,
                               zero_state)
from nmrqsim.spectrum import (compute_fid, default_spectral_width, fid_from_propagator,
                              fid_to_spectrum, group_doublets, peak_list)
from nmrqsim.spin_system import (SULFANOL_REFERENCE_MATRIX, build_hamiltonian,
                                 sulfanol_reference_hamiltonian, sulfanol_spec)
from nmrqsim.trotter_qpe import (QpeConfig, complete_by_trace, qpe_distribution_unitary,
                                 run_qpe, scale_hamiltonian, trotter_system_unitary)
from nmrqsim.vqe import (OptimizerConfig, amplitude_confinement, deflation_vqe, vqe_minimize,
                         w_sweep, xy_ansatz)
from nmrqsim.zne import ZneConfig, fold_circuit, mitigated_expectation, richardson_extrapolate

from .conftest import ACCEPTANCE_LINES, EVEN_BELL, SINGLET, random_pauli_sum
from .oracles import pauli_exp
from .test_simulator import _random_circuit
from .test_spin_system import _random_spec

PRINTED_EIGENVALUES = np.array([-4970.9263, -1054.927, 1062.215, 4963.6383])
PRINTED_VECTORS = np.array([
    [0, 0.99999, -0.00073, 0],
    [0, 0, 0, 1],
    [1, 0, 0, 0],
    [0, -0.00073, 0.99999, 0],
])
PRINTED_PHASES = [-0.042480468750, 0.042724609375, 0.199462890625]
PRINTED_COMPLETION = -0.199707031250


@contextmanager
def criterion(key: str, title: str, budget_s: float):
    notes: list[str] = []
    t0 = time.perf_counter()

    def record(status, extra=""):
        elapsed = time.perf_counter() - t0
        detail = "; ".join(notes + ([extra] if extra else []))
        line = f"criterion {key:<4} {status}: {title} [{elapsed:.2f}s] {detail}".rstrip()
        num = key.rstrip("ab")
        ACCEPTANCE_LINES[num.zfill(2) + key[len(num):]] = line
        print("\n" + line)

    try:
        yield notes
    except AssertionError as exc:
        record("FAIL", str(exc).splitlines()[0] if str(exc) else "assertion failed")
        raise
    elapsed = time.perf_counter() - t0
    if elapsed > budget_s:
        record("FAIL", f"runtime over {budget_s}s budget")
        pytest.fail(f"runtime {elapsed:.1f}s exceeds {budget_s}s")
    record("PASS")


def test_criterion_01_hamiltonian():
    with criterion("1", "Hamiltonian from quoted inputs vs printed matrix", 1.0) as notes:
        dense = build_hamiltonian(sulfanol_spec()).to_dense().real
        diff = np.abs(dense - SULFANOL_REFERENCE_MATRIX).max()
        off = dense[1, 2]
        notes += [f"max |diff| = {diff:.3f} rad/s", f"off-diagonal = {off:.6f}"]
        assert diff <= 10.0, f"entrywise difference {diff:.3f} > 10"
        assert abs(off - 7.288) <= 1e-3 and dense[2, 1] == off


def test_criterion_02_exact_diagonalization():
    with criterion("2", "eigenpairs of the printed matrix", 1.0) as notes:
        d = eigen_decompose(SULFANOL_REFERENCE_MATRIX)
        ev_err = np.abs(d.eigenvalues - PRINTED_EIGENVALUES).max()
        notes.append(f"max eigenvalue error {ev_err:.2e}")
        worst = 0.0
        for k in range(4):
            v = d.vector(k).real
            err = min(np.abs(v - PRINTED_VECTORS[k]).max(), np.abs(v + PRINTED_VECTORS[k]).max())
            worst = max(worst, err)
            if err > 1e-3:
                notes.append(f"v{k} = {np.round(v, 5).tolist()} vs printed "
                             f"{PRINTED_VECTORS[k].tolist()} (best-sign error {err:.2e})")
        notes.append(f"worst eigenvector component error {worst:.2e}")
        assert ev_err <= 1e-3
        assert worst <= 1e-3, f"eigenvector component error {worst:.2e} > 1e-3"


def test_criterion_03_scaling_constant(ham):
    with criterion("3", "scaling constant C = 4 x bound", 1.0) as notes:
        lo, hi = eigen_range_bounds(sulfanol_reference_hamiltonian())
        c = 4 * max(abs(lo), abs(hi))
        lo_q, hi_q = eigen_range_bounds(ham)
        notes += [f"C = {c:.4f} (printed matrix)",
                  f"C = {4 * max(abs(lo_q), abs(hi_q)):.4f} (quoted inputs)"]
        assert abs(c - 24881.07) <= 0.5


def test_criterion_04_trotter_bound():
    with criterion("4", "Trotter bound for t = 2 pi, r = 10", 5.0) as notes:
        s = scale_hamiltonian(sulfanol_reference_hamiltonian())
        bound = trotter_error_bound(s.scaled, 2 * math.pi, 10)
        u = trotter_system_unitary(s, 10)
        err = np.linalg.norm(u - expm(2j * math.pi * s.scaled.to_dense()))
        notes += [f"bound = {bound:.4e}", f"measured = {err:.4e}"]
        assert 3.0e-4 <= bound <= 3.6e-4
        assert err <= bound


def _qpe_check(t, method, notes):
    h = sulfanol_reference_hamiltonian()
    d = eigen_decompose(h)
    s = scale_hamiltonian(h)
    # 100 shots per attempt so the reported bin is the modal one, not a lucky neighbour
    cfg = QpeConfig(t_ancillas=t, trotter_steps=10, shots=100, seed=7, method=method)
    # the three eigenvectors whose phases were measured; the fourth comes from the trace
    found = run_qpe(h, cfg, [d.vector(k) for k in (1, 2, 3)])
    assert all(e.verified for e in found), "an outcome failed verification"
    phases = sorted(e.shifted_phase for e in found)
    completed = complete_by_trace(phases, h.trace() / s.c_scale)[-1]
    notes += [f"phases {phases}", f"trace completion {completed}"]
    grid = 2.0 ** -t
    slack = s.c_scale * trotter_error_bound(s.scaled, 2 * math.pi, 10) / (2 * math.pi)
    values = np.array(sorted(phases + [completed])) * s.c_scale
    worst = np.abs(values - d.eigenvalues).max()
    notes.append(f"worst eigenvalue error {worst:.3f} (allowed {grid * s.c_scale + slack:.3f})")
    assert worst <= grid * s.c_scale + slack
    return phases, completed


@pytest.mark.slow
def test_criterion_05_qpe_full_circuit():
    with criterion("5", "QPE, 12 ancillas, gate-level 14-qubit statevector", 600.0) as notes:
        phases, completed = _qpe_check(12, "circuit", notes)
        assert phases == PRINTED_PHASES, f"phases {phases} differ from printed"
        assert completed == pytest.approx(PRINTED_COMPLETION, abs=1e-12)


def test_criterion_05_qpe_ci_gate():
    with criterion("5a", "QPE CI gate: 8 ancillas, gate-level", 30.0) as notes:
        phases, completed = _qpe_check(8, "circuit", notes)
        for got, want in zip(phases, PRINTED_PHASES):
            assert abs(got - want) <= 2.0 ** -8
        assert abs(completed - PRINTED_COMPLETION) <= 3 * 2.0 ** -8


def test_criterion_05_qpe_compiled_t12():
    with criterion("5b", "QPE, 12 ancillas, compiled controlled powers", 30.0) as notes:
        phases, completed = _qpe_check(12, "compiled", notes)
        assert phases == PRINTED_PHASES
        assert completed == pytest.approx(PRINTED_COMPLETION, abs=1e-12)


def test_criterion_06_probability_floor():
    with criterion("6", "QPE modal probability >= 4/pi^2 at t = 6", 10.0) as notes:
        h = sulfanol_reference_hamiltonian()
        s = scale_hamiltonian(h)
        d = eigen_decompose(h)
        u = expm(2j * math.pi * s.scaled.to_dense())
        worst = 1.0
        for k in range(4):
            phase = d.eigenvalues[k] / s.c_scale + 0.25
            frac = (phase * 64) % 1
            assert 0.01 < frac < 0.99, "eigenphase is grid-aligned"
            p = qpe_distribution_unitary(u, d.vector(k), 6)
            worst = min(worst, p.max())
        notes.append(f"min modal probability {worst:.4f} vs floor {4 / math.pi ** 2:.4f}")
        assert worst >= 4 / math.pi ** 2


def test_criterion_07_vqe_ground_state(oracle, ham):
    with criterion("7", "VQE ground state, exact and 10^4-shot modes", 60.0) as notes:
        lam0 = oracle.eigenvalues[0]
        exact = vqe_minimize(ham, initial_state=SINGLET, theta0=[0.0, 0.0])
        notes.append(f"exact error {abs(exact.eigenvalue - lam0):.2e}")
        assert abs(exact.eigenvalue - lam0) <= 0.05
        prep = singlet_preparation()
        errors = [vqe_minimize(ham, prep=prep, shots=10_000, seed=s).eigenvalue - lam0
                  for s in range(20)]
        hits = sum(abs(e) <= 1.5 for e in errors)
        notes.append(f"sampled within 1.5 rad/s: {hits}/20 "
                     f"(errors {min(errors):+.3f}..{max(errors):+.3f})")
        assert hits >= 18


def test_criterion_08_folded_spectrum(oracle, ham):
    with criterion("8", "folded-spectrum w-sweep, exact mode", 120.0) as notes:
        res = w_sweep(ham, [SINGLET, EVEN_BELL])
        assert len(res) == 4, f"sweep found {len(res)} eigenvalues"
        vals = np.array([r.eigenvalue for r in res])
        err = np.abs(vals - oracle.eigenvalues).max()
        overlaps = [abs(np.vdot(r.eigenvector, oracle.vector(k))) ** 2
                    for k, r in enumerate(res)]
        neg = [r for r in res if r.w < 0]
        notes += [f"max error {err:.2e}", f"min overlap {min(overlaps):.6f}",
                  f"{len(neg)} levels from w < 0"]
        assert err <= 0.1
        assert min(overlaps) >= 0.999
        assert neg and all(r.eigenvalue <= r.w for r in neg)


def test_criterion_09_deflation_regression(ham):
    with criterion("9", "deflation from the singlet does not verify level 1", 60.0) as notes:
        res = deflation_vqe(ham, 2, initial_state=SINGLET, theta0=[0.0, 0.0])
        notes.append(f"level 1 energy {res[1].energy:.2f}, verified={res[1].verified}, "
                     f"converged={res[1].converged}")
        assert res[0].verified
        assert res[1].verified is False or not res[1].converged
        rng = np.random.default_rng(2024)
        a = xy_ansatz(2)
        leak = max(1 - amplitude_confinement(a, rng.uniform(-np.pi, np.pi, 2), SINGLET, [1, 2])
                   for _ in range(1000))
        notes.append(f"max leakage out of span(|01>,|10>) over 1000 theta: {leak:.1e}")
        assert leak <= 1e-12


def test_criterion_10_zne(ham):
    with criterion("10", "ZNE beats unmitigated in >= 80% of 50 seeds", 300.0) as notes:
        prep = singlet_preparation()
        a = xy_ansatz(2)
        theta = vqe_minimize(ham, a, prep=prep).theta_star
        circ = prep + a.circuit(theta)
        ideal = expectation(apply_circuit(zero_state(2), circ), ham)
        cfg = ZneConfig()
        wins, raw_err, mit_err = 0, [], []
        for seed in range(50):
            mit, pts = mitigated_expectation(circ, ham, NoiseModel(), cfg, seed=seed,
                                             return_points=True)
            raw_err.append(pts[0][1] - ideal)
            mit_err.append(mit - ideal)
            wins += abs(mit - ideal) < abs(pts[0][1] - ideal)
        notes += [f"{wins}/50 wins", f"mean unmitigated bias {np.mean(raw_err):+.1f}",
                  f"mean mitigated bias {np.mean(mit_err):+.1f}"]
        assert wins >= 40


def _doublets(decomp, field=400.0, offset=5.0):
    sw = default_spectral_width(field)
    fid = compute_fid(decomp, d=32768, spectral_width=sw)
    peaks = peak_list(fid_to_spectrum(fid, field, offset), 0.3, relative=True)
    return peaks, sw / 32768


def test_criterion_11_spectrum(oracle, ham):
    with criterion("11", "doublets at 3.44 / 7.40 ppm, J = 2.32 Hz", 30.0) as notes:
        peaks, bin_hz = _doublets(oracle)
        assert len(peaks) == 4, f"{len(peaks)} peaks"
        pairs = group_doublets(peaks, 5.0)
        assert len(pairs) == 2
        for (p, q), centre in zip(pairs, (7.40, 3.44)):
            mid = (p.ppm + q.ppm) / 2
            split = abs(p.hz - q.hz)
            notes.append(f"{mid:.4f} ppm split {split:.3f} Hz")
            assert abs(mid - centre) <= 0.01
            assert abs(split - 2.32) <= bin_hz
        res = w_sweep(ham, [SINGLET, EVEN_BELL])
        vqe = EigenDecomposition(np.array([r.eigenvalue for r in res]),
                                 np.column_stack([r.eigenvector for r in res]))
        vpeaks, _ = _doublets(vqe)
        shift = max(abs(a.ppm - b.ppm) for a, b in zip(peaks, vpeaks))
        notes.append(f"vqe pipeline: {len(vpeaks)} peaks, max ppm shift {shift:.1e}")
        assert len(vpeaks) == 4 and shift < 0.01


def test_criterion_12_property_suites():
    with criterion("12", "oracle-equivalence properties", 300.0) as notes:
        rng = np.random.default_rng(12)
        worst = {}
        for _ in range(50):
            a = random_pauli_sum(rng, 3, 5, hermitian=False)
            b = random_pauli_sum(rng, 3, 4, hermitian=False)
            da, db = a.to_dense(), b.to_dense()
            e = max(np.abs((a * b).to_dense() - da @ db).max(),
                    np.abs((a + b).to_dense() - da - db).max())
            worst["pauli"] = max(worst.get("pauli", 0), e)

            an = xy_ansatz(3)
            th = rng.uniform(-np.pi, np.pi, an.n_params)
            want = np.eye(8, dtype=complex)
            for (_, axes), t in zip(an.factors, th):
                want = pauli_exp(axes, t) @ want
            worst["ansatz"] = max(worst.get("ansatz", 0),
                                  np.abs(an.circuit(th).unitary() - want).max())

            c = _random_circuit(rng, 3, 10)
            worst["folding"] = max(worst.get("folding", 0),
                                   np.abs(fold_circuit(c, 3).unitary() - c.unitary()).max())

            m = int(rng.integers(2, 6))
            coeffs = rng.uniform(-3, 3, m)
            pts = [(1 + 2 * k, float(np.polynomial.polynomial.polyval(1 + 2 * k, coeffs)))
                   for k in range(m)]
            worst["richardson"] = max(worst.get("richardson", 0),
                                      abs(richardson_extrapolate(pts) - coeffs[0]))
        for seed in range(10):
            h = build_hamiltonian(_random_spec(seed, 3)).to_dense()
            fid = compute_fid(eigen_decompose(h), d=16, spectral_width=2000.0)
            worst["fid"] = max(worst.get("fid", 0),
                               np.abs(fid.points - fid_from_propagator(h, fid.times)).max())
        notes.append(", ".join(f"{k} {v:.1e}" for k, v in worst.items()))
        tol = {"pauli": 1e-9, "ansatz": 1e-9, "folding": 1e-9, "richardson": 1e-9, "fid": 1e-8}
        for k, v in worst.items():
            assert v <= tol[k], f"{k} error {v:.2e} > {tol[k]}"

