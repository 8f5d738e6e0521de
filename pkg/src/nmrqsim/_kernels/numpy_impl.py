"""Vectorized numpy kernels; the reference fallback when numba is disabled."""
from functools import lru_cache

import numpy as np

ONE_QUBIT = 0
CNOT = 1
CPHASE = 2


def apply_1q(states, u, q, n):
    batch = states.shape[0]
    view = states.reshape(batch, 1 << q, 2, 1 << (n - 1 - q))
    view[...] = np.einsum("ij,bajc->baic", u, view)


@lru_cache(maxsize=256)
def _cnot_indices(control, target, n):
    idx = np.arange(1 << n)
    cm = 1 << (n - 1 - control)
    tm = 1 << (n - 1 - target)
    src = idx[(idx & cm != 0) & (idx & tm == 0)]
    return src, src | tm


@lru_cache(maxsize=256)
def _both_set(control, target, n):
    idx = np.arange(1 << n)
    cm = 1 << (n - 1 - control)
    tm = 1 << (n - 1 - target)
    return idx[(idx & cm != 0) & (idx & tm != 0)]


def apply_cnot(states, control, target, n):
    src, dst = _cnot_indices(control, target, n)
    tmp = states[:, src].copy()
    states[:, src] = states[:, dst]
    states[:, dst] = tmp


def apply_cphase(states, phi, control, target, n):
    states[:, _both_set(control, target, n)] *= np.exp(1j * phi)


def _apply_gate(states, code, q0, q1, mat, angle, n):
    if code == ONE_QUBIT:
        apply_1q(states, mat, q0, n)
    elif code == CNOT:
        apply_cnot(states, q0, q1, n)
    else:
        apply_cphase(states, angle, q0, q1, n)


def run_gates(states, codes, qubits, mats, angles, n):
    for g in range(codes.shape[0]):
        _apply_gate(states, codes[g], qubits[g, 0], qubits[g, 1], mats[g], angles[g], n)


def run_noisy(states, codes, qubits, mats, angles, n, err_u, qsel, psel, p1, p2, paulis):
    for g in range(codes.shape[0]):
        code = codes[g]
        _apply_gate(states, code, qubits[g, 0], qubits[g, 1], mats[g], angles[g], n)
        two = code != ONE_QUBIT
        hit = err_u[g] < (p2 if two else p1)
        if not hit.any():
            continue
        where_q = qubits[g, qsel[g]] if two else np.full(hit.shape, qubits[g, 0])
        for q in np.unique(where_q[hit]):
            for k in range(paulis.shape[0]):
                rows = np.nonzero(hit & (where_q == q) & (psel[g] == k))[0]
                if rows.size:
                    sub = states[rows]
                    apply_1q(sub, paulis[k], q, n)
                    states[rows] = sub


def jacobi_eigh(a, tol, max_sweeps):
    n = a.shape[0]
    a = np.array(a, dtype=float)
    v = np.eye(n)
    norm = np.linalg.norm(a)
    sweeps = 0
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * norm or off == 0.0:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return np.diag(a).copy(), v, sweeps


def lu_logdet(a):
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    phase = 1.0 + 0.0j
    logabs = 0.0
    for k in range(n):
        piv = k + int(np.argmax(np.abs(a[k:, k])))
        d = a[piv, k]
        if d == 0:
            return 0.0 + 0.0j, -np.inf
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            phase = -phase
        phase *= d / abs(d)
        logabs += np.log(abs(d))
        f = a[k + 1:, k] / d
        a[k + 1:, k + 1:] -= np.outer(f, a[k, k + 1:])
    return phase, logabs


def dft(x):
    x = np.asarray(x, dtype=complex)
    n = x.shape[0]
    j = np.arange(n)
    out = np.empty(n, dtype=complex)
    block = max(1, (1 << 22) // max(n, 1))
    for start in range(0, n, block):
        k = np.arange(start, min(n, start + block))
        out[start:start + k.size] = np.exp(-2j * np.pi * (np.outer(k, j) % n) / n) @ x
    return out
