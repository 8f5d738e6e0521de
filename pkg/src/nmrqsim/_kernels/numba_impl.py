"""Loop kernels compiled with numba.

Every function mirrors one in ``numpy_impl`` with the same signature and
in-place semantics. States are stored as a (batch, 2**n) complex128 array and
qubit 0 is the most significant bit of the basis index.
"""
import numpy as np
from numba import njit

ONE_QUBIT = 0
CNOT = 1
CPHASE = 2


@njit(cache=True)
def apply_1q(states, u, q, n):
    batch, dim = states.shape
    stride = 1 << (n - 1 - q)
    u00, u01, u10, u11 = u[0, 0], u[0, 1], u[1, 0], u[1, 1]
    for b in range(batch):
        for hi in range(0, dim, 2 * stride):
            for lo in range(stride):
                i0 = hi + lo
                i1 = i0 + stride
                a0 = states[b, i0]
                a1 = states[b, i1]
                states[b, i0] = u00 * a0 + u01 * a1
                states[b, i1] = u10 * a0 + u11 * a1


@njit(cache=True)
def apply_cnot(states, control, target, n):
    batch, dim = states.shape
    cm = 1 << (n - 1 - control)
    tm = 1 << (n - 1 - target)
    for b in range(batch):
        for i in range(dim):
            if (i & cm) and not (i & tm):
                j = i | tm
                tmp = states[b, i]
                states[b, i] = states[b, j]
                states[b, j] = tmp


@njit(cache=True)
def apply_cphase(states, phi, control, target, n):
    batch, dim = states.shape
    cm = 1 << (n - 1 - control)
    tm = 1 << (n - 1 - target)
    ph = np.exp(1j * phi)
    for b in range(batch):
        for i in range(dim):
            if (i & cm) and (i & tm):
                states[b, i] *= ph


@njit(cache=True)
def _apply_gate(states, code, q0, q1, mat, angle, n):
    if code == ONE_QUBIT:
        apply_1q(states, mat, q0, n)
    elif code == CNOT:
        apply_cnot(states, q0, q1, n)
    else:
        apply_cphase(states, angle, q0, q1, n)


@njit(cache=True)
def run_gates(states, codes, qubits, mats, angles, n):
    for g in range(codes.shape[0]):
        _apply_gate(states, codes[g], qubits[g, 0], qubits[g, 1], mats[g], angles[g], n)


@njit(cache=True)
def _apply_1q_row(states, b, u, q, n):
    dim = states.shape[1]
    stride = 1 << (n - 1 - q)
    for hi in range(0, dim, 2 * stride):
        for lo in range(stride):
            i0 = hi + lo
            i1 = i0 + stride
            a0 = states[b, i0]
            a1 = states[b, i1]
            states[b, i0] = u[0, 0] * a0 + u[0, 1] * a1
            states[b, i1] = u[1, 0] * a0 + u[1, 1] * a1


@njit(cache=True)
def run_noisy(states, codes, qubits, mats, angles, n, err_u, qsel, psel, p1, p2, paulis):
    batch = states.shape[0]
    for g in range(codes.shape[0]):
        code = codes[g]
        _apply_gate(states, code, qubits[g, 0], qubits[g, 1], mats[g], angles[g], n)
        two = code != ONE_QUBIT
        p = p2 if two else p1
        for b in range(batch):
            if err_u[g, b] < p:
                q = qubits[g, qsel[g, b]] if two else qubits[g, 0]
                _apply_1q_row(states, b, paulis[psel[g, b]], q, n)


@njit(cache=True)
def jacobi_eigh(a, tol, max_sweeps):
    n = a.shape[0]
    a = a.copy()
    v = np.eye(n)
    norm = 0.0
    for i in range(n):
        for j in range(n):
            norm += a[i, j] * a[i, j]
    norm = np.sqrt(norm)
    sweeps = 0
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += 2.0 * a[i, j] * a[i, j]
        if np.sqrt(off) <= tol * norm or off == 0.0:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i]
    return w, v, sweeps


@njit(cache=True)
def lu_logdet(a):
    n = a.shape[0]
    a = a.astype(np.complex128)
    phase = 1.0 + 0.0j
    logabs = 0.0
    for k in range(n):
        piv = k
        best = abs(a[k, k])
        for i in range(k + 1, n):
            if abs(a[i, k]) > best:
                best = abs(a[i, k])
                piv = i
        if best == 0.0:
            return 0.0 + 0.0j, -np.inf
        if piv != k:
            for j in range(n):
                tmp = a[k, j]
                a[k, j] = a[piv, j]
                a[piv, j] = tmp
            phase = -phase
        d = a[k, k]
        phase *= d / abs(d)
        logabs += np.log(abs(d))
        for i in range(k + 1, n):
            f = a[i, k] / d
            if f != 0.0:
                for j in range(k + 1, n):
                    a[i, j] -= f * a[k, j]
    return phase, logabs


@njit(cache=True)
def dft(x):
    n = x.shape[0]
    out = np.empty(n, dtype=np.complex128)
    for k in range(n):
        acc = 0.0 + 0.0j
        for j in range(n):
            # reduce the exponent mod n so the angle stays small
            ang = -2.0 * np.pi * ((j * k) % n) / n
            acc += x[j] * (np.cos(ang) + 1j * np.sin(ang))
        out[k] = acc
    return out
